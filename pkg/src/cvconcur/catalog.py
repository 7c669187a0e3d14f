"""Bookkeeping of cavity modes, pumps and chi(2) elements.

Frequencies live on an integer lattice so energy conservation is exact:

* a mode with ``freq = k`` sits at ``w0 + k*FSR``;
* a pump with ``freq = p`` sits at ``2*w0 + p*FSR``, i.e. its half frequency
  is ``w0 + p*FSR/2``. Consecutive pump indices are half an FSR apart on that
  scale, and a pump ``p`` drives the pair ``(k1, k2)`` iff ``k1 + k2 == p``.

Tensor labels are pump-first: ``yzy`` means a y-polarised pump creating one
z and one y photon. Only the five labels below exist.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .errors import InvalidArgumentError, NumericRangeError, UnbalanceableError
from .gaussian import CouplingMatrix, complete_graph_coupling


class Pol(str, enum.Enum):
    Y = "y"
    Z = "z"

    def __str__(self):
        return self.value


TENSOR_LABELS = ("yzy", "zzz", "yyy", "yzz", "zyy")


def _pol(value) -> Pol:
    try:
        return Pol(str(value).lower())
    except ValueError:
        raise InvalidArgumentError(f"unknown polarization {value!r}") from None


@dataclass(frozen=True, order=True)
class ModeLabel:
    freq: int
    pol: Pol

    def __post_init__(self):
        object.__setattr__(self, "freq", int(self.freq))
        object.__setattr__(self, "pol", _pol(self.pol))

    def __str__(self):
        return f"{self.freq} {self.pol}"


@dataclass(frozen=True)
class PumpField:
    freq: int
    pol: Pol
    amplitude: float = 1.0
    phase_flip: bool = False  # pump phase pi instead of 0; off in the frozen-phase regime

    def __post_init__(self):
        object.__setattr__(self, "freq", int(self.freq))
        object.__setattr__(self, "pol", _pol(self.pol))
        if not (self.amplitude >= 0 and np.isfinite(self.amplitude)):
            raise InvalidArgumentError("pump amplitude must be finite and >= 0")

    @property
    def key(self) -> tuple[int, Pol]:
        return (self.freq, self.pol)

    @property
    def sign(self) -> int:
        return -1 if self.phase_flip else 1

    def __str__(self):
        return f"{self.freq} {self.pol}"


@dataclass(frozen=True)
class ChiElement:
    label: str
    value: float = 1.0
    phase_matched: bool = True

    def __post_init__(self):
        if self.label not in TENSOR_LABELS:
            raise InvalidArgumentError(f"unknown tensor label {self.label!r}; expected one of {TENSOR_LABELS}")
        if not np.isfinite(self.value):
            raise InvalidArgumentError("chi value must be finite")

    @property
    def pump_pol(self) -> Pol:
        return Pol(self.label[0])

    @property
    def pair_pols(self) -> tuple[Pol, Pol]:
        return tuple(sorted((Pol(self.label[1]), Pol(self.label[2]))))


@dataclass(frozen=True)
class InteractionTerm:
    mode_a: ModeLabel
    mode_b: ModeLabel
    pump: PumpField
    chi: ChiElement

    def __post_init__(self):
        if self.mode_a.freq + self.mode_b.freq != self.pump.freq:
            raise InvalidArgumentError(f"energy not conserved: {self.mode_a} + {self.mode_b} != pump {self.pump}")
        if self.pump.pol is not self.chi.pump_pol or tuple(sorted((self.mode_a.pol, self.mode_b.pol))) != self.chi.pair_pols:
            raise InvalidArgumentError(f"polarizations do not match tensor element {self.chi.label}")

    @property
    def degenerate(self) -> bool:
        return self.mode_a == self.mode_b

    @property
    def strength(self) -> float:
        return self.pump.sign * self.pump.amplitude * self.chi.value


@dataclass(frozen=True)
class CouplingGraph:
    vertices: tuple[ModeLabel, ...]
    edges: tuple[InteractionTerm, ...] = field(default=())

    def __post_init__(self):
        vs = tuple(self.vertices)
        if len(set(vs)) != len(vs):
            raise InvalidArgumentError("duplicate modes in graph")
        members = set(vs)
        for e in self.edges:
            if e.mode_a not in members or e.mode_b not in members:
                raise InvalidArgumentError(f"edge endpoint not among vertices: {e.mode_a}, {e.mode_b}")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", tuple(self.edges))

    def index(self, mode: ModeLabel) -> int:
        return self.vertices.index(mode)

    @property
    def self_loops(self) -> list[InteractionTerm]:
        return [e for e in self.edges if e.degenerate]

    @property
    def pumps(self) -> list[PumpField]:
        seen = {}
        for e in self.edges:
            seen.setdefault(e.pump.key, e.pump)
        return list(seen.values())

    def coupling_matrix(self) -> CouplingMatrix:
        """Sum of term strengths; a degenerate term contributes its strength to G_ii."""
        n = len(self.vertices)
        g = np.zeros((n, n))
        for e in self.edges:
            i, j = self.index(e.mode_a), self.index(e.mode_b)
            g[i, j] += e.strength
            if i != j:
                g[j, i] += e.strength
        return CouplingMatrix(g)

    def is_complete(self) -> bool:
        n = len(self.vertices)
        pairs = {frozenset((self.index(e.mode_a), self.index(e.mode_b))) for e in self.edges if not e.degenerate}
        return len(pairs) == n * (n - 1) // 2


def enumerate_terms(modes, pumps, chis) -> CouplingGraph:
    """Every energy-conserving, polarization-allowed, phase-matched term."""
    modes = list(modes)
    if not modes:
        raise InvalidArgumentError("mode list is empty")
    labels = [c.label for c in chis]
    if len(set(labels)) != len(labels):
        raise InvalidArgumentError(f"duplicate tensor labels in {labels}")
    keys = [p.key for p in pumps]
    if len(set(keys)) != len(keys):
        raise InvalidArgumentError("duplicate pump (frequency, polarization)")
    active = [c for c in chis if c.phase_matched]
    edges = []
    for pump in pumps:
        for chi in active:
            if chi.pump_pol is not pump.pol:
                continue
            for ia, ib in itertools.combinations_with_replacement(range(len(modes)), 2):
                a, b = modes[ia], modes[ib]
                if a.freq + b.freq != pump.freq:
                    continue
                if tuple(sorted((a.pol, b.pol))) != chi.pair_pols:
                    continue
                edges.append(InteractionTerm(a, b, pump, chi))
    return CouplingGraph(tuple(modes), tuple(edges))


def connected_components(graph: CouplingGraph) -> list[frozenset]:
    """Undirected components; self-loops never merge anything."""
    n = len(graph.vertices)
    rows, cols = [], []
    for e in graph.edges:
        if not e.degenerate:
            rows.append(graph.index(e.mode_a))
            cols.append(graph.index(e.mode_b))
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, labels = _cc(adj, directed=False)
    groups: dict[int, list[ModeLabel]] = {}
    for v, lab in zip(graph.vertices, labels):
        groups.setdefault(lab, []).append(v)
    return [frozenset(g) for g in groups.values()]


def balance_pumps(terms, kappa: float) -> list[PumpField]:
    """Pump amplitudes giving |beta*chi| = kappa on every term.

    Pumps are returned in order of first appearance, with the amplitude
    replaced. Two terms on one pump must agree on chi (value and sign).
    """
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    needed: dict[tuple, tuple[PumpField, float, float]] = {}
    for term in terms:
        chi = term.chi.value
        if chi == 0:
            raise InvalidArgumentError(f"zero chi for {term.chi.label}")
        key = term.pump.key
        if key in needed:
            _, beta, prev_chi = needed[key]
            if not np.isclose(chi, prev_chi, rtol=1e-12, atol=0.0):
                raise UnbalanceableError(
                    f"pump {term.pump} drives terms with chi {prev_chi:g} and {chi:g}; "
                    "one amplitude cannot balance both"
                )
            continue
        needed[key] = (term.pump, kappa / abs(chi), chi)
    return [
        PumpField(p.freq, p.pol, amplitude=beta, phase_flip=p.phase_flip)
        for p, beta, _ in needed.values()
    ]


@dataclass(frozen=True)
class ConflictGroup:
    pump_freq: int
    entries: tuple[tuple[int, int, float], ...]  # (i, j, desired value), i <= j


@dataclass(frozen=True)
class Verdict:
    realizable: bool
    conflicts: tuple[ConflictGroup, ...]


def realizability_check(desired: CouplingMatrix, modes) -> Verdict:
    """Shared-pump sign test.

    Terms driven by one pump field carry that pump's phase, so every nonzero
    entry (i, j) with the same ``freq_i + freq_j`` must share a sign.
    """
    modes = list(modes)
    g = desired.entries
    if len(modes) != desired.size:
        raise InvalidArgumentError(f"{len(modes)} modes for a {desired.size}x{desired.size} matrix")
    cut = 1e-12 * max(float(np.max(np.abs(g))), 1e-300)
    groups: dict[int, list[tuple[int, int, float]]] = {}
    for i in range(len(modes)):
        for j in range(i, len(modes)):
            if abs(g[i, j]) > cut:
                groups.setdefault(modes[i].freq + modes[j].freq, []).append((i, j, float(g[i, j])))
    conflicts = []
    for freq in sorted(groups):
        signs = {np.sign(v) for _, _, v in groups[freq]}
        if len(signs) > 1:
            conflicts.append(ConflictGroup(freq, tuple(groups[freq])))
    return Verdict(not conflicts, tuple(conflicts))


@dataclass(frozen=True)
class Construction:
    graph: CouplingGraph
    matrix: CouplingMatrix
    contaminating_terms: tuple[InteractionTerm, ...] = ()

    @property
    def contaminated(self) -> bool:
        return bool(self.contaminating_terms)

    def __iter__(self):
        # unpacks as (graph, matrix)
        return iter((self.graph, self.matrix))


def _build(kappa, modes, intended, chis) -> Construction:
    # intended: list of (mode_a, mode_b, pump_key, label)
    if not kappa > 0:
        raise InvalidArgumentError("kappa must be positive")
    chi_by_label = {c.label: c for c in chis}
    base_pumps = {}
    terms = []
    for a, b, (freq, pol), label in intended:
        pump = base_pumps.setdefault((freq, pol), PumpField(freq, pol))
        terms.append(InteractionTerm(a, b, pump, chi_by_label[label]))
    pumps = balance_pumps(terms, kappa)
    graph = enumerate_terms(modes, pumps, chis)
    wanted = {(frozenset((a, b)), key) for a, b, key, _ in intended}
    extra = tuple(e for e in graph.edges if (frozenset((e.mode_a, e.mode_b)), e.pump.key) not in wanted)
    return Construction(graph, graph.coupling_matrix(), extra)


def _chi_set(chi_values: dict | None, extra_labels) -> list[ChiElement]:
    values = {"yzy": 1.0, "zzz": 1.0, "yyy": 1.0, "yzz": 1.0, "zyy": 1.0}
    values.update(chi_values or {})
    return [ChiElement(label, values[label]) for label in extra_labels]


def build_h3_experimental(kappa: float, chi_values: dict | None = None, extra_chis=()) -> Construction:
    """Three modes {y(w0), z(w0), z(w1)} coupled by concurrent yzy and zzz downconversion.

    ``extra_chis`` adds phase-matched labels (e.g. ``"yyy"``) to show which
    configurations pick up unwanted terms.
    """
    y0, z0, z1 = ModeLabel(0, Pol.Y), ModeLabel(0, Pol.Z), ModeLabel(1, Pol.Z)
    intended = [
        (y0, z0, (0, Pol.Y), "yzy"),
        (y0, z1, (1, Pol.Y), "yzy"),
        (z0, z1, (1, Pol.Z), "zzz"),
    ]
    labels = ["yzy", "zzz"] + [lab for lab in extra_chis if lab not in ("yzy", "zzz")]
    return _build(kappa, [y0, z0, z1], intended, _chi_set(chi_values, labels))


def build_h4_experimental(kappa: float, chi_values: dict | None = None, extra_chis=()) -> Construction:
    """Four equally spaced modes {y(w0), z(w1), y(w2), z(w3)}: yzy, yyy and zzz concurrently.

    Five pumps; the pump at w1+w2 drives both z(w1)y(w2) and y(w0)z(w3).
    """
    y0, z1, y2, z3 = ModeLabel(0, Pol.Y), ModeLabel(1, Pol.Z), ModeLabel(2, Pol.Y), ModeLabel(3, Pol.Z)
    intended = [
        (y0, z1, (1, Pol.Y), "yzy"),
        (y0, y2, (2, Pol.Y), "yyy"),
        (z1, y2, (3, Pol.Y), "yzy"),
        (y0, z3, (3, Pol.Y), "yzy"),
        (z1, z3, (4, Pol.Z), "zzz"),
        (y2, z3, (5, Pol.Y), "yzy"),
    ]
    labels = ["yzy", "yyy", "zzz"] + [lab for lab in extra_chis if lab not in ("yzy", "yyy", "zzz")]
    return _build(kappa, [y0, z1, y2, z3], intended, _chi_set(chi_values, labels))


def singly_pumped_graph(k_min: int, k_max: int, pump_freq: int, pol: Pol = Pol.Z) -> CouplingGraph:
    """Comb of same-polarization modes k_min..k_max under one pump.

    Even ``pump_freq`` is the degenerate case (self-loop on mode pump_freq/2),
    odd is the nondegenerate one.
    """
    if k_max < k_min:
        raise InvalidArgumentError("empty comb range")
    pol = _pol(pol)
    modes = [ModeLabel(k, pol) for k in range(k_min, k_max + 1)]
    return enumerate_terms(modes, [PumpField(pump_freq, pol)], [ChiElement(pol.value * 3)])


# --- exploratory search beyond four modes -------------------------------------------

MAX_SEARCH_MODES = 12
MAX_SEARCH_PUMPS = 12

H4_PATTERN = (ModeLabel(0, Pol.Y), ModeLabel(1, Pol.Z), ModeLabel(2, Pol.Y), ModeLabel(3, Pol.Z))
BASE_CHIS = ("yzy", "zzz", "yyy")
CROSS_CHIS = ("yzy", "zzz", "yyy", "yzz", "zyy")


@dataclass(frozen=True)
class SearchReport:
    modes: tuple[ModeLabel, ...]
    chi_labels: tuple[str, ...]
    pumps: tuple[PumpField, ...]
    missing_edges: tuple[tuple[ModeLabel, ModeLabel], ...]
    degenerate_terms: tuple[InteractionTerm, ...]
    conflicts: tuple[ConflictGroup, ...]

    @property
    def full_coverage(self) -> bool:
        return not self.missing_edges

    @property
    def clean(self) -> bool:
        return self.full_coverage and not self.degenerate_terms and not self.conflicts


def _required_pumps(modes, chis) -> list[PumpField]:
    pumps = {}
    for a, b in itertools.combinations(modes, 2):
        pair = tuple(sorted((a.pol, b.pol)))
        for chi in chis:
            if chi.phase_matched and chi.pair_pols == pair:
                pumps.setdefault((a.freq + b.freq, chi.pump_pol), None)
    return [PumpField(f, p) for f, p in sorted(pumps)]


def examine_configuration(modes, chi_labels) -> SearchReport:
    """Pump every pair that some phase-matched element can couple, then see what else appears.

    Conflicts come from :func:`realizability_check` applied to the matrix one
    would need: the complete graph plus, on each mode hit by an unwanted
    degenerate term, the opposite-sign term that would cancel it.
    """
    modes = tuple(modes)
    if len(modes) > MAX_SEARCH_MODES:
        raise NumericRangeError(f"{len(modes)} modes exceeds search cap {MAX_SEARCH_MODES}")
    chis = [ChiElement(label) for label in chi_labels]
    pumps = _required_pumps(modes, chis)
    if len(pumps) > MAX_SEARCH_PUMPS:
        raise NumericRangeError(f"{len(pumps)} pumps exceeds search cap {MAX_SEARCH_PUMPS}")
    graph = enumerate_terms(modes, pumps, chis)
    covered = {frozenset((e.mode_a, e.mode_b)) for e in graph.edges if not e.degenerate}
    missing = tuple((a, b) for a, b in itertools.combinations(modes, 2) if frozenset((a, b)) not in covered)
    loops = tuple(graph.self_loops)
    target = complete_graph_coupling(len(modes), 1.0).entries.copy() if len(modes) > 1 else np.zeros((1, 1))
    for e in loops:
        i = graph.index(e.mode_a)
        target[i, i] -= e.strength
    verdict = realizability_check(CouplingMatrix(target), modes)
    return SearchReport(modes, tuple(chi_labels), tuple(pumps), missing, loops, verdict.conflicts)


def five_mode_candidates() -> list[tuple[ModeLabel, ...]]:
    """The H4 pattern extended by one mode on either side, either polarization."""
    out = []
    for freq in (4, -1):
        for pol in (Pol.Y, Pol.Z):
            out.append(tuple(sorted(H4_PATTERN + (ModeLabel(freq, pol),))))
    return out


def explore_n5(mode_sets=None, chi_sets=None) -> list[SearchReport]:
    """Exploratory scan of five-mode extensions. Reports findings; proves nothing."""
    mode_sets = five_mode_candidates() if mode_sets is None else [tuple(m) for m in mode_sets]
    chi_sets = [BASE_CHIS, CROSS_CHIS] if chi_sets is None else [tuple(c) for c in chi_sets]
    if len(mode_sets) * len(chi_sets) > 256:
        raise NumericRangeError("search space too large")
    reports = [examine_configuration(m, c) for m in mode_sets for c in chi_sets]
    return sorted(reports, key=lambda r: ([(m.freq, m.pol.value) for m in r.modes], r.chi_labels))


# --- edge-list text format ----------------------------------------------------------


def format_edges(graph: CouplingGraph) -> str:
    """One line per term: ``pumpIndex pol | modeA | modeB | sign | kappa``."""
    lines = []
    for e in graph.edges:
        s = e.strength
        sign = "+" if s >= 0 else "-"
        lines.append(f"{e.pump} | {e.mode_a} | {e.mode_b} | {sign} | {abs(s):.12g}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_edges(text: str) -> list[tuple[PumpField, ModeLabel, ModeLabel, float]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 5 or parts[3] not in "+-" or not parts[3]:
            raise InvalidArgumentError(f"line {lineno}: malformed edge {line!r}")
        pf, pp = parts[0].split()
        (af, ap), (bf, bp) = parts[1].split(), parts[2].split()
        value = float(parts[4]) * (1 if parts[3] == "+" else -1)
        out.append((PumpField(int(pf), pp), ModeLabel(int(af), ap), ModeLabel(int(bf), bp), value))
    return out
