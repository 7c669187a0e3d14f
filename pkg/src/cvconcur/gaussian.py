"""Gaussian-state dynamics of quadratic downconversion Hamiltonians.

Conventions (used everywhere in the package):

* hbar = 1, ``X = (a + a^dag)/sqrt(2)``, ``P = i(a^dag - a)/sqrt(2)``, so a
  vacuum quadrature has variance 1/2.
* Quadrature vectors are ordered XXPP: ``(X_1..X_N, P_1..P_N)``.
* A coupling matrix ``G`` stands for the Hamiltonian
  ``H = (i/2) sum_ij G_ij (a_i^dag a_j^dag - a_i a_j)``. The off-diagonal
  entry ``G_ij`` is the two-mode rate (beta*chi) of ``a_i^dag a_j^dag``; the
  diagonal entry ``G_ii`` is the rate of a single-mode squeezer
  ``(i/2) G_ii (a_i^dag^2 - a_i^2)``.

With this Hamiltonian the Heisenberg equations read ``da/dt = G a^dag``,
hence ``X(t) = exp(G t) X`` and ``P(t) = exp(-G t) P``.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import InvalidArgumentError, NumericRangeError

VACUUM_VARIANCE = 0.5
DEFAULT_ZERO_TOL = 1e-9
DEFAULT_EXPONENT_CAP = 50.0
DEFAULT_WITNESS_THRESHOLD = 1.0

_SYMMETRY_RTOL = 1e-12


def symplectic_form(n: int) -> np.ndarray:
    """Standard symplectic form in XXPP ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class CouplingMatrix:
    """Real symmetric matrix of downconversion rates (inverse time)."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.array(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
            raise InvalidArgumentError(f"coupling matrix must be square and non-empty, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise InvalidArgumentError("coupling matrix has non-finite entries")
        scale = max(np.max(np.abs(g)), 1.0)
        if np.max(np.abs(g - g.T)) > _SYMMETRY_RTOL * scale:
            raise InvalidArgumentError("coupling matrix is not symmetric")
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "entries", g)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(np.all(self.entries == other.entries))

    def __hash__(self):
        return hash(self.entries.tobytes())


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of an N-mode Gaussian state (XXPP)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2 or cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(f"inconsistent state shapes: mean {mean.shape}, cov {cov.shape}")
        scale = max(np.max(np.abs(cov)), 1.0)
        if np.max(np.abs(cov - cov.T)) > 1e-9 * scale:
            raise InvalidArgumentError("covariance matrix is not symmetric")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    @classmethod
    def vacuum(cls, n: int) -> "GaussianState":
        if n < 1:
            raise InvalidArgumentError("mode count must be positive")
        return cls(np.zeros(2 * n), VACUUM_VARIANCE * np.eye(2 * n))

    def is_physical(self, tol: float = 1e-9) -> bool:
        """Positive definiteness and the uncertainty relation cov + (i/2) Omega >= 0."""
        scale = max(np.max(np.abs(self.cov)), 1.0)
        if np.linalg.eigvalsh(self.cov).min() <= 0:
            return False
        herm = self.cov + 0.5j * symplectic_form(self.n_modes)
        return bool(np.linalg.eigvalsh(herm).min() >= -tol * scale)

    def purity_determinant(self) -> float:
        """det(2 cov); equals 1 for pure states."""
        return float(np.linalg.det(2.0 * self.cov))


@dataclass(frozen=True)
class JointQuadrature:
    """The operator sum_i x_i X_i + sum_i p_i P_i."""

    x: np.ndarray
    p: np.ndarray
    name: str = ""

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        p = np.array(self.p, dtype=float).reshape(-1)
        if x.shape != p.shape:
            raise InvalidArgumentError("x and p coefficient vectors differ in length")
        if not np.any(x) and not np.any(p):
            raise InvalidArgumentError("joint quadrature needs at least one nonzero coefficient")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n_modes(self) -> int:
        return self.x.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    @classmethod
    def x_only(cls, coeffs, name: str = "") -> "JointQuadrature":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs, np.zeros_like(coeffs), name)

    @classmethod
    def p_only(cls, coeffs, name: str = "") -> "JointQuadrature":
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(np.zeros_like(coeffs), coeffs, name)


class ModeClass(str, enum.Enum):
    P_SQUEEZED = "P-squeezed"
    X_SQUEEZED = "X-squeezed"
    CONSTANT = "constant"


@dataclass(frozen=True)
class EigenmodeReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    classes: tuple[ModeClass, ...]
    zero_tol: float = DEFAULT_ZERO_TOL

    def squeezed_operator(self, k: int) -> JointQuadrature:
        """The joint quadrature that squeezes for eigenmode ``k``.

        Constant modes return their X combination (the P one is equally
        constant).
        """
        v = self.eigenvectors[:, k]
        if self.classes[k] is ModeClass.P_SQUEEZED:
            return JointQuadrature.p_only(v, f"P_eig{k + 1}")
        return JointQuadrature.x_only(v, f"X_eig{k + 1}")

    def rate(self, k: int) -> float:
        return abs(float(self.eigenvalues[k])) if self.classes[k] is not ModeClass.CONSTANT else 0.0

    def vacuum_variance(self, k: int, t: float) -> float:
        """Variance of the squeezed operator of mode k, starting from vacuum."""
        return VACUUM_VARIANCE * float(np.exp(-2.0 * self.rate(k) * t))

    def count(self, cls: ModeClass) -> int:
        return sum(1 for c in self.classes if c is cls)


def _canonical_signs(vecs: np.ndarray) -> np.ndarray:
    # first significant component of each column made positive, for reproducible output
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size and col[idx[0]] < 0:
            out[:, k] = -col
    return out


def eigenmodes(g: CouplingMatrix, zero_tol: float = DEFAULT_ZERO_TOL) -> EigenmodeReport:
    """Eigen-decompose G and classify every joint mode.

    ``zero_tol`` is relative to the spectral radius: an eigenvalue with
    ``|lam| <= zero_tol * max|lam|`` is a constant of motion.
    """
    if zero_tol < 0:
        raise InvalidArgumentError("zero_tol must be non-negative")
    try:
        lam, vecs = np.linalg.eigh(g.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericRangeError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    vecs = _canonical_signs(vecs[:, order])
    radius = float(np.max(np.abs(lam))) if lam.size else 0.0
    cut = zero_tol * radius
    classes = []
    for value in lam:
        if abs(value) <= cut or radius == 0.0:
            classes.append(ModeClass.CONSTANT)
        elif value > 0:
            classes.append(ModeClass.P_SQUEEZED)
        else:
            classes.append(ModeClass.X_SQUEEZED)
    return EigenmodeReport(lam, vecs, tuple(classes), zero_tol)


def propagator(g: CouplingMatrix, t: float, exponent_cap: float = DEFAULT_EXPONENT_CAP) -> np.ndarray:
    """Symplectic matrix blockdiag(exp(G t), exp(-G t)) acting on XXPP vectors."""
    if not np.isfinite(t):
        raise InvalidArgumentError("time must be finite")
    if t == 0:
        return np.eye(2 * g.size)
    lam, vecs = np.linalg.eigh(g.entries)
    worst = int(np.argmax(np.abs(lam)))
    if abs(lam[worst] * t) > exponent_cap:
        raise NumericRangeError(
            f"|lambda*t| = {abs(lam[worst] * t):.6g} exceeds cap {exponent_cap:g} "
            f"(eigenvalue {lam[worst]:.6g}, t = {t:.6g})"
        )
    grow = (vecs * np.exp(lam * t)) @ vecs.T
    shrink = (vecs * np.exp(-lam * t)) @ vecs.T
    n = g.size
    s = np.zeros((2 * n, 2 * n))
    s[:n, :n] = grow
    s[n:, n:] = shrink
    return s


def evolve(state: GaussianState, g: CouplingMatrix, t: float) -> GaussianState:
    if state.n_modes != g.size:
        raise InvalidArgumentError(f"state has {state.n_modes} modes, coupling matrix {g.size}")
    s = propagator(g, t)
    cov = s @ state.cov @ s.T
    return GaussianState(s @ state.mean, 0.5 * (cov + cov.T))


def joint_variance(state: GaussianState, q: JointQuadrature) -> float:
    if state.n_modes != q.n_modes:
        raise InvalidArgumentError(f"state has {state.n_modes} modes, quadrature {q.n_modes}")
    c = q.vector
    return float(max(c @ state.cov @ c, 0.0))


@dataclass(frozen=True)
class PassiveNetwork:
    """Real orthogonal mode-mixing matrix; output modes b = U a."""

    matrix: np.ndarray = field()

    def __post_init__(self):
        u = np.array(self.matrix, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise InvalidArgumentError("network matrix must be square")
        if np.max(np.abs(u @ u.T - np.eye(u.shape[0]))) > 1e-12:
            raise InvalidArgumentError("network matrix is not orthogonal")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def apply_network(g: CouplingMatrix, u: PassiveNetwork) -> CouplingMatrix:
    """Coupling matrix of the same Hamiltonian written in the modes b = U a."""
    if g.size != u.size:
        raise InvalidArgumentError(f"coupling matrix is {g.size}x{g.size}, network {u.size}x{u.size}")
    m = u.matrix
    return CouplingMatrix(m @ g.entries @ m.T)


def make_nsplitter(n: int) -> PassiveNetwork:
    """Orthogonal n-port splitter whose first column is uniform, 1/sqrt(n).

    Built by Gram-Schmidt on (1,...,1)/sqrt(n), e_2, ..., e_n. For n = 3 this
    plays the role of the 2:1 + 1:1 beam-splitter "tritter".
    """
    if n < 2:
        raise InvalidArgumentError("splitter needs at least 2 ports")
    basis = np.eye(n)
    basis[:, 0] = 1.0 / np.sqrt(n)
    cols = []
    for k in range(n):
        v = basis[:, k].copy()
        for c in cols:
            v -= (c @ v) * c
        cols.append(v / np.linalg.norm(v))
    return PassiveNetwork(np.column_stack(cols))


def complete_graph_coupling(n: int, kappa: float) -> CouplingMatrix:
    """Every mode pairs with every other at rate kappa, no single-mode terms."""
    if n < 2:
        raise InvalidArgumentError("complete graph needs n >= 2")
    if not np.isfinite(kappa):
        raise InvalidArgumentError("kappa must be finite")
    return CouplingMatrix(kappa * (np.ones((n, n)) - np.eye(n)))


def chain_coupling(n: int, kappa: float) -> CouplingMatrix:
    """Nearest-neighbour chain 1-2, 2-3, ...; n = 3 is the two-link failure case."""
    if n < 2:
        raise InvalidArgumentError("chain needs n >= 2")
    g = np.zeros((n, n))
    idx = np.arange(n - 1)
    g[idx, idx + 1] = g[idx + 1, idx] = kappa
    return CouplingMatrix(g)


def single_mode_squeezers(rates) -> CouplingMatrix:
    return CouplingMatrix(np.diag(np.asarray(rates, dtype=float)))


def vlb_coupling(n: int, kappa: float) -> CouplingMatrix:
    """Squeezers diag(-k, k, ..., k) mixed on a uniform n-splitter.

    Diagonal (n-2)k/n, off-diagonal -2k/n.
    """
    rates = np.full(n, float(kappa))
    rates[0] = -kappa
    return apply_network(single_mode_squeezers(rates), make_nsplitter(n))


def witness_pair(
    state: GaussianState,
    i: int,
    j: int,
    gains=None,
    threshold: float = DEFAULT_WITNESS_THRESHOLD,
) -> tuple[float, float]:
    """Var(X_i - X_j) + Var(P_i + P_j + sum_k g_k P_k) and the separability threshold.

    Mode indices are zero-based; ``gains`` runs over the remaining modes in
    increasing index order (default all ones). Values below the threshold
    flag inseparability.
    """
    n = state.n_modes
    if i == j:
        raise InvalidArgumentError("witness needs two distinct modes")
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidArgumentError(f"mode index out of range for {n} modes")
    others = [k for k in range(n) if k not in (i, j)]
    gains = np.ones(len(others)) if gains is None else np.asarray(gains, dtype=float).reshape(-1)
    if gains.size != len(others):
        raise InvalidArgumentError(f"expected {len(others)} gains, got {gains.size}")
    xdiff = np.zeros(n)
    xdiff[i], xdiff[j] = 1.0, -1.0
    psum = np.zeros(n)
    psum[i] = psum[j] = 1.0
    psum[others] = gains
    value = joint_variance(state, JointQuadrature.x_only(xdiff)) + joint_variance(state, JointQuadrature.p_only(psum))
    return value, float(threshold)


def dump_matrix(matrix: np.ndarray, stream: TextIO | None = None) -> str:
    """Row-major CSV at full double precision (debugging aid)."""
    buf = io.StringIO()
    for row in np.atleast_2d(matrix):
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text
