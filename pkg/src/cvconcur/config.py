"""Scenario configuration files (TOML) for the ``evolve``, ``eigenmodes`` and ``check`` commands.

Layout::

    [scenario]
    kind = "h3"        # h1 h2_chain h3 hN h3_experimental h4_experimental
                       # vlb_transformed singly_pumped custom
    n = 3              # hN, h2_chain, vlb_transformed
    kappa = 1.0

    [time]
    kappa_t = [0.0, 0.5]         # or: start, stop, steps

    [[quadrature]]               # optional; defaults are derived from the scenario
    name = "Psum"
    x = [0, 0, 0]
    p = [1, 1, 1]

    [witness]
    enabled = true
    pairs = [[1, 2]]             # 1-based mode numbers; default all pairs
    gains = [1.0]                # one per remaining mode
    threshold = 1.0

    [singly_pumped]
    k_min = -3
    k_max = 3
    pump = 0
    polarization = "z"

    [custom]
    matrix = [[0, 1], [1, 0]]    # or [[custom.mode]], [[custom.pump]], [[custom.chi]] tables
    freqs = [0, 1]               # frequency indices for ``check`` when a matrix is given

    [check]
    freqs = [0, 1, 2]            # override the mode frequency lattice for ``check``
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import catalog, gaussian
from .errors import CVError, ConfigError

KINDS = (
    "h1", "h2_chain", "h3", "hN", "h3_experimental", "h4_experimental",
    "vlb_transformed", "singly_pumped", "custom",
)
_SECTIONS = {"scenario", "time", "quadrature", "witness", "singly_pumped", "custom", "check"}
_KEYS = {
    "scenario": {"kind", "n", "kappa"},
    "time": {"kappa_t", "start", "stop", "steps"},
    "quadrature": {"name", "x", "p"},
    "witness": {"enabled", "pairs", "gains", "threshold"},
    "singly_pumped": {"k_min", "k_max", "pump", "polarization"},
    "custom": {"matrix", "freqs", "mode", "pump", "chi"},
    "check": {"freqs"},
}


@dataclass
class WitnessSettings:
    enabled: bool = True
    pairs: list | None = None  # zero-based
    gains: list | None = None
    threshold: float = gaussian.DEFAULT_WITNESS_THRESHOLD


@dataclass
class Scenario:
    kind: str
    kappa: float
    matrix: gaussian.CouplingMatrix
    freqs: list[int]
    kappa_t: list[float] = field(default_factory=lambda: [0.0])
    quadratures: list[gaussian.JointQuadrature] = field(default_factory=list)
    witness: WitnessSettings = field(default_factory=WitnessSettings)
    graph: catalog.CouplingGraph | None = None

    @property
    def n_modes(self) -> int:
        return self.matrix.size


def _check_keys(doc: dict):
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    for sec, allowed in _KEYS.items():
        tables = doc.get(sec)
        if tables is None:
            continue
        for table in tables if isinstance(tables, list) else [tables]:
            extra = set(table) - allowed
            if extra:
                raise ConfigError(f"unknown keys in [{sec}]: {sorted(extra)}")


def _require(table: dict, key: str, kind: str):
    if key not in table:
        raise ConfigError(f"scenario kind {kind!r} needs '{key}'")
    return table[key]


def default_quadratures(g: gaussian.CouplingMatrix) -> list[gaussian.JointQuadrature]:
    """P sum, every pairwise X difference, and each eigenmode's squeezed operator."""
    n = g.size
    out = [gaussian.JointQuadrature.p_only(np.ones(n), "Psum")]
    for i, j in itertools.combinations(range(n), 2):
        c = np.zeros(n)
        c[i], c[j] = 1.0, -1.0
        out.append(gaussian.JointQuadrature.x_only(c, f"X{i + 1}mX{j + 1}"))
    report = gaussian.eigenmodes(g)
    out.extend(report.squeezed_operator(k) for k in range(n))
    return out


def _time_grid(doc: dict) -> list[float]:
    t = doc.get("time", {})
    if "kappa_t" in t:
        grid = [float(v) for v in t["kappa_t"]]
    elif {"start", "stop", "steps"} <= set(t):
        steps = int(t["steps"])
        if steps < 1:
            raise ConfigError("time.steps must be >= 1")
        grid = list(np.linspace(float(t["start"]), float(t["stop"]), steps))
    elif t:
        raise ConfigError("[time] needs kappa_t or start/stop/steps")
    else:
        grid = [0.0]
    if not grid:
        raise ConfigError("empty time grid")
    return grid


def _custom(doc: dict, kappa: float):
    table = doc.get("custom")
    if table is None:
        raise ConfigError("scenario kind 'custom' needs a [custom] section")
    if "matrix" in table:
        g = gaussian.CouplingMatrix(np.array(table["matrix"], dtype=float))
        freqs = [int(v) for v in table.get("freqs", range(g.size))]
        return g, freqs, None
    try:
        modes = [catalog.ModeLabel(m["freq"], m["pol"]) for m in table["mode"]]
        pumps = [
            catalog.PumpField(p["freq"], p["pol"], float(p.get("amplitude", 1.0)), bool(p.get("phase_flip", False)))
            for p in table.get("pump", [])
        ]
        chis = [
            catalog.ChiElement(c["label"], float(c.get("value", 1.0)), bool(c.get("phase_matched", True)))
            for c in table.get("chi", [])
        ]
    except KeyError as exc:
        raise ConfigError(f"[custom] table entry lacks {exc}") from exc
    graph = catalog.enumerate_terms(modes, pumps, chis)
    return graph.coupling_matrix(), [m.freq for m in modes], graph


def build_scenario(doc: dict) -> Scenario:
    _check_keys(doc)
    sc = doc.get("scenario")
    if not sc or "kind" not in sc:
        raise ConfigError("missing [scenario] kind")
    kind = sc["kind"]
    if kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}; expected one of {KINDS}")
    kappa = float(sc.get("kappa", 1.0))
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    graph = None
    try:
        if kind == "h1":
            g = gaussian.complete_graph_coupling(2, kappa)
        elif kind == "h3":
            g = gaussian.complete_graph_coupling(3, kappa)
        elif kind == "hN":
            g = gaussian.complete_graph_coupling(int(_require(sc, "n", kind)), kappa)
        elif kind == "h2_chain":
            g = gaussian.chain_coupling(int(sc.get("n", 3)), kappa)
        elif kind == "vlb_transformed":
            g = gaussian.vlb_coupling(int(_require(sc, "n", kind)), kappa)
        elif kind in ("h3_experimental", "h4_experimental"):
            build = catalog.build_h3_experimental if kind == "h3_experimental" else catalog.build_h4_experimental
            graph, g = build(kappa)
        elif kind == "singly_pumped":
            sp = doc.get("singly_pumped")
            if sp is None:
                raise ConfigError("scenario kind 'singly_pumped' needs a [singly_pumped] section")
            graph = catalog.singly_pumped_graph(
                int(_require(sp, "k_min", kind)), int(_require(sp, "k_max", kind)),
                int(_require(sp, "pump", kind)), sp.get("polarization", "z"),
            )
            graph = catalog.enumerate_terms(
                graph.vertices, catalog.balance_pumps(graph.edges, kappa) if graph.edges else [],
                [catalog.ChiElement(str(sp.get("polarization", "z")) * 3)],
            )
            g = graph.coupling_matrix()
        else:
            g, freqs, graph = _custom(doc, kappa)
    except CVError as exc:
        raise ConfigError(str(exc)) from exc

    if graph is not None:
        freqs = [m.freq for m in graph.vertices]
    elif kind != "custom":
        freqs = list(range(g.size))
    if "check" in doc and "freqs" in doc["check"]:
        freqs = [int(v) for v in doc["check"]["freqs"]]
    if len(freqs) != g.size:
        raise ConfigError(f"{len(freqs)} frequencies given for {g.size} modes")

    quads = []
    for q in doc.get("quadrature", []):
        try:
            quad = gaussian.JointQuadrature(q["x"], q["p"], str(q.get("name", f"q{len(quads) + 1}")))
        except KeyError as exc:
            raise ConfigError(f"[[quadrature]] lacks {exc}") from exc
        except CVError as exc:
            raise ConfigError(str(exc)) from exc
        if quad.n_modes != g.size:
            raise ConfigError(f"quadrature {quad.name!r} has {quad.n_modes} coefficients for {g.size} modes")
        quads.append(quad)
    if not quads:
        quads = default_quadratures(g)

    w = doc.get("witness", {})
    pairs = w.get("pairs")
    if pairs is not None:
        pairs = [(int(i) - 1, int(j) - 1) for i, j in pairs]
        for i, j in pairs:
            if i == j or not (0 <= i < g.size and 0 <= j < g.size):
                raise ConfigError(f"invalid witness pair ({i + 1}, {j + 1})")
    gains = w.get("gains")
    if gains is not None and len(gains) != g.size - 2:
        raise ConfigError(f"witness needs {g.size - 2} gains, got {len(gains)}")
    witness = WitnessSettings(
        enabled=bool(w.get("enabled", g.size >= 2)),
        pairs=pairs,
        gains=gains,
        threshold=float(w.get("threshold", gaussian.DEFAULT_WITNESS_THRESHOLD)),
    )
    return Scenario(kind, kappa, g, freqs, _time_grid(doc), quads, witness, graph)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return build_scenario(doc)
