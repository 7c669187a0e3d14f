"""Command-line front end: ``cvconcur evolve|eigenmodes|check|qpm|verify``.

Exit codes: 0 success (or realizable), 1 domain-negative result, 2 bad
configuration or arguments, 3 numeric range error.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import sys
from pathlib import Path

from . import catalog, gaussian, qpm
from . import verify as verify_mod
from .config import load_scenario
from .errors import ConfigError, CVError, NoSolutionError, NumericRangeError

EXIT_OK, EXIT_NEGATIVE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x: float) -> str:
    return f"{x:.12g}"


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


# --- entanglement scenarios ------------------------------------------------------------


def cmd_evolve(args) -> int:
    sc = load_scenario(args.config)
    names = [f"var_{q.name}" for q in sc.quadratures]
    pairs = []
    if sc.witness.enabled and sc.n_modes >= 2:
        pairs = sc.witness.pairs or list(itertools.combinations(range(sc.n_modes), 2))
        names += [f"witness_{i + 1}_{j + 1}" for i, j in pairs]
    rows = []
    vac = gaussian.GaussianState.vacuum(sc.n_modes)
    for kt in sc.kappa_t:
        state = gaussian.evolve(vac, sc.matrix, kt / sc.kappa)
        row = [kt] + [gaussian.joint_variance(state, q) for q in sc.quadratures]
        for i, j in pairs:
            row.append(gaussian.witness_pair(state, i, j, sc.witness.gains, sc.witness.threshold)[0])
        rows.append(row)
    with _output(args.out) as out:
        out.write(f"# scenario: {sc.kind}\n# modes: {sc.n_modes}\n# kappa: {fmt(sc.kappa)}\n")
        out.write("# conventions: hbar=1, vacuum quadrature variance 1/2, X=(a+a^dag)/sqrt(2), XXPP ordering\n")
        if pairs:
            out.write(f"# witness threshold: {fmt(sc.witness.threshold)} (value below threshold flags inseparability)\n")
        for q in sc.quadratures:
            out.write(f"# {q.name}: x={[fmt(v) for v in q.x]} p={[fmt(v) for v in q.p]}\n")
        out.write(",".join(["kappa_t"] + names) + "\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_eigenmodes(args) -> int:
    sc = load_scenario(args.config)
    report = gaussian.eigenmodes(sc.matrix, args.zero_tol)
    with _output(args.out) as out:
        out.write(f"# scenario: {sc.kind}\n# squeezed-operator variance from vacuum: 0.5*exp(-2*|lambda|*t)\n")
        out.write(",".join(["index", "eigenvalue", "class", "operator"] + [f"v{k + 1}" for k in range(sc.n_modes)]) + "\n")
        for k in range(sc.n_modes):
            op = report.squeezed_operator(k).name.split("_")[0]
            vec = report.eigenvectors[:, k]
            out.write(",".join([str(k + 1), fmt(report.eigenvalues[k]), report.classes[k].value, op] + [fmt(v) for v in vec]) + "\n")
    return EXIT_OK


def cmd_check(args) -> int:
    sc = load_scenario(args.config)
    modes = [catalog.ModeLabel(f, "z") for f in sc.freqs]
    verdict = catalog.realizability_check(sc.matrix, modes)
    with _output(args.out) as out:
        out.write(f"scenario: {sc.kind}\nmode frequencies: {sc.freqs}\n")
        if sc.graph is not None:
            out.write("terms (pump | modeA | modeB | sign | kappa):\n")
            out.write(catalog.format_edges(sc.graph))
        if verdict.realizable:
            out.write("verdict: realizable\n")
        else:
            out.write(f"verdict: NOT realizable ({len(verdict.conflicts)} shared-pump conflict group(s))\n")
            for c in verdict.conflicts:
                entries = ", ".join(f"G[{i + 1},{j + 1}]={fmt(v)}" for i, j, v in c.entries)
                out.write(f"conflict: pump frequency {c.pump_freq}: {entries}\n")
    return EXIT_OK if verdict.realizable else EXIT_NEGATIVE


# --- QPM ---------------------------------------------------------------------------------


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _interaction_spec(text: str) -> tuple[str, int]:
    label, _, order = text.partition(":")
    try:
        return label, int(order or 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LABEL[:ORDER], got {text!r}") from None


def _plot_script(path: Path, series: list[tuple[str, Path]], title: str):
    lines = [
        "# Generated by cvconcur: overlay of SHG temperature tuning curves.",
        "import numpy as np",
        "import matplotlib.pyplot as plt",
        "",
        "fig, ax = plt.subplots()",
    ]
    for label, csv in series:
        lines.append(f"data = np.loadtxt({str(csv)!r}, delimiter=',', skiprows=1, comments='#')")
        lines.append(f"ax.plot(data[:, 0], data[:, 1], label={label!r})")
    lines += [
        "ax.set_xlabel('temperature (C)')",
        "ax.set_ylabel('normalized SHG power')",
        f"ax.set_title({title!r})",
        "ax.legend()",
        "plt.show()",
        "",
    ]
    path.write_text("\n".join(lines))


def cmd_qpm(args) -> int:
    s = qpm.load_dataset(args.dataset)
    if args.qpm_cmd == "period":
        q = qpm.QpmInteraction.from_dataset(s, args.label, args.order, args.wavelength)
        with _output(args.out) as out:
            out.write(fmt(qpm.qpm_period(s, q, args.temp)) + "\n")
        return EXIT_OK
    if args.qpm_cmd == "curve":
        q = qpm.QpmInteraction.from_dataset(s, args.label, args.order, args.wavelength)
        period = args.period if args.period is not None else qpm.qpm_period(s, q, args.temp)
        curve = qpm.shg_curve(s, q, period, args.length, args.t_range, args.steps)
        with _output(args.out) as out:
            out.write(f"# {s.name}: {q.label} order {q.order}, period {fmt(period)} um, length {fmt(args.length)} mm\n")
            qpm.write_curve_csv(curve, out)
        if args.plot_script:
            if args.out in (None, "-"):
                raise ConfigError("--plot-script needs --out so the script can find the CSV")
            _plot_script(Path(args.plot_script), [(f"{q.label} m={q.order}", Path(args.out).resolve())],
                         f"period {period:.4g} um")
        return EXIT_OK
    # concur
    (l1, m1), (l2, m2) = args.first, args.second
    q1 = qpm.QpmInteraction.from_dataset(s, l1, m1, args.wavelength)
    q2 = qpm.QpmInteraction.from_dataset(s, l2, m2, args.wavelength)
    found = qpm.find_concurrences(
        s, q1, q2, args.period_range, args.t_range, args.lobes, args.length, args.grid, args.tol
    )
    with _output(args.out) as out:
        out.write(f"# {s.name}: {q1.label} m={q1.order} vs {q2.label} m={q2.order}, length {fmt(args.length)} mm\n")
        out.write("period_um,temperature_C,lobe_first,lobe_second,efficiency,mismatch_C\n")
        for c in found:
            out.write(f"{fmt(c.period)},{fmt(c.temperature)},{c.lobes[0]},{c.lobes[1]},{fmt(c.efficiency)},{fmt(c.mismatch)}\n")
    if args.plot_script and found:
        script = Path(args.plot_script)
        best = found[0]
        series = []
        for q in (q1, q2):
            csv = script.with_name(f"{script.stem}_{q.label}_m{q.order}.csv")
            curve = qpm.shg_curve(s, q, best.period, args.length, args.t_range, 2001)
            csv.write_text(qpm.write_curve_csv(curve))
            series.append((f"{q.label} m={q.order}", csv.resolve()))
        _plot_script(script, series, f"period {best.period:.5g} um")
    if not found:
        print("no concurrence found in the given ranges", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


# --- verification ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    results = verify_mod.run(quick=args.quick)
    worst = max(results, key=lambda r: (not r.converged, r.error))
    failed = [r for r in results if not r.ok]
    with _output(args.out) as out:
        out.write(f"checked {len(results)} variances (tolerance {verify_mod.TOLERANCE:g})\n")
        for r in failed:
            out.write(f"FAIL {r.scenario} kappa_t={fmt(r.kappa_t)} {r.quadrature}: "
                      f"gaussian={fmt(r.gaussian)} oracle={fmt(r.oracle)} converged={r.converged}\n")
        out.write(f"worst: {worst.scenario} kappa_t={fmt(worst.kappa_t)} {worst.quadrature} "
                  f"error={worst.error:.3e} converged={worst.converged}\n")
        out.write("PASS\n" if not failed else "FAIL\n")
    return EXIT_OK if not failed else EXIT_NEGATIVE


# --- parser ------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvconcur", description="Multimode CV entanglement from concurrent chi(2) interactions, and QPM design.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=False):
        if config:
            sp.add_argument("--config", required=True, help="scenario TOML file")
        sp.add_argument("--out", default=None, help="output path (default: stdout)")

    sp = sub.add_parser("evolve", help="joint-quadrature variances and witnesses versus kappa*t")
    common(sp, config=True)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("eigenmodes", help="eigen-decomposition and squeezing class of each joint mode")
    common(sp, config=True)
    sp.add_argument("--zero-tol", type=float, default=gaussian.DEFAULT_ZERO_TOL)
    sp.set_defaults(func=cmd_eigenmodes)

    sp = sub.add_parser("check", help="shared-pump realizability of the scenario's coupling matrix")
    common(sp, config=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("verify", help="compare the Gaussian propagator with the Fock-space oracle")
    common(sp)
    sp.add_argument("--quick", action="store_true", help="only scenarios with at most two modes")
    sp.set_defaults(func=cmd_verify)

    qp = sub.add_parser("qpm", help="quasi-phase-matching design")
    qsub = qp.add_subparsers(dest="qpm_cmd", required=True, parser_class=_Parser)

    def qcommon(sp):
        sp.add_argument("--dataset", default=None, help=f"Sellmeier TOML (default: ${qpm.DATASET_ENV} or bundled RTA-class model)")
        sp.add_argument("--wavelength", type=float, default=1.064, help="fundamental wavelength, um")
        sp.add_argument("--out", default=None)
        sp.set_defaults(func=cmd_qpm)

    sp = qsub.add_parser("period", help="first-order or m-th order poling period")
    sp.add_argument("label", choices=qpm.QPM_LABELS)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--temp", type=float, default=25.0)
    qcommon(sp)

    sp = qsub.add_parser("curve", help="SHG power versus temperature")
    sp.add_argument("label", choices=qpm.QPM_LABELS)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--period", type=float, default=None, help="um (default: solved at --temp)")
    sp.add_argument("--temp", type=float, default=25.0)
    sp.add_argument("--length", type=float, default=10.0, help="crystal length, mm")
    sp.add_argument("--t-range", type=_range, default=(0.0, 100.0))
    sp.add_argument("--steps", type=int, default=2001)
    sp.add_argument("--plot-script", default=None)
    qcommon(sp)

    sp = qsub.add_parser("concur", help="search periods where two interactions peak at one temperature")
    sp.add_argument("--first", type=_interaction_spec, default=("yzy", 1))
    sp.add_argument("--second", type=_interaction_spec, default=("zzz", 5))
    sp.add_argument("--period-range", type=_range, required=True)
    sp.add_argument("--t-range", type=_range, default=(0.0, 100.0))
    sp.add_argument("--lobes", type=int, default=0, help="side-lobe depth (0 = main lobes only)")
    sp.add_argument("--length", type=float, default=10.0, help="crystal length, mm")
    sp.add_argument("--grid", type=int, default=401)
    sp.add_argument("--tol", type=float, default=0.5, help="temperature coincidence tolerance, C")
    sp.add_argument("--plot-script", default=None)
    qcommon(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoSolutionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except NumericRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
