"""Truncated Fock-space simulator for the same quadratic Hamiltonians.

This is an independent check on :mod:`cvconcur.gaussian`: it never touches
covariance matrices, it builds ``H`` from ladder operators in the number
basis and evolves the vacuum state vector directly. Only practical for up to
three modes and short times.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidArgumentError, NumericRangeError, OutOfRangeError
from .gaussian import CouplingMatrix, JointQuadrature

MAX_DIMENSION = 100_000
DENSE_LIMIT = 4096
CONVERGENCE_TOL = 1e-4
NORM_TOL = 1e-10


@dataclass(frozen=True)
class FockConfig:
    mode_count: int
    cutoff: int = 12
    time_step: float | None = None  # RK4 step; None picks one from the operator norm
    recheck_increment: int = 4
    max_exponent: float = 0.75  # |lambda_max * t| allowed before truncation becomes suspect

    def __post_init__(self):
        if not 1 <= self.mode_count <= 3:
            raise InvalidArgumentError("Fock oracle supports 1 to 3 modes")
        if self.cutoff < 1:
            raise InvalidArgumentError("cutoff must be >= 1")
        for c in (self.cutoff, self.cutoff + self.recheck_increment):
            if (c + 1) ** self.mode_count > MAX_DIMENSION:
                raise NumericRangeError(
                    f"Fock dimension ({c + 1})^{self.mode_count} exceeds {MAX_DIMENSION}"
                )


def _annihilation(cutoff: int) -> sp.csr_matrix:
    n = np.arange(1, cutoff + 1)
    return sp.diags(np.sqrt(n), 1, shape=(cutoff + 1, cutoff + 1), format="csr")


@lru_cache(maxsize=16)
def _ladder_ops(n_modes: int, cutoff: int) -> tuple[sp.csr_matrix, ...]:
    a = _annihilation(cutoff)
    eye = sp.identity(cutoff + 1, format="csr")
    ops = []
    for k in range(n_modes):
        factors = [a if m == k else eye for m in range(n_modes)]
        op = factors[0]
        for f in factors[1:]:
            op = sp.kron(op, f, format="csr")
        ops.append(op)
    return tuple(ops)


def hamiltonian(g: CouplingMatrix, cutoff: int) -> sp.csr_matrix:
    """H = (i/2) sum_ij G_ij (a_i^dag a_j^dag - a_i a_j) in the truncated basis."""
    ops = _ladder_ops(g.size, cutoff)
    dim = ops[0].shape[0]
    create = sp.csr_matrix((dim, dim))
    for i in range(g.size):
        for j in range(g.size):
            if g.entries[i, j]:
                create = create + g.entries[i, j] * (ops[i].T @ ops[j].T)
    h = 0.5j * (create - create.T)
    if abs(h - h.getH()).max() > 0:
        raise NumericRangeError("constructed Hamiltonian is not Hermitian")
    return h.tocsr()


def _rk4(generator: sp.csr_matrix, psi: np.ndarray, t: float, step: float | None) -> np.ndarray:
    # generator is real antisymmetric (-iH); halve the step until the norm holds
    if t == 0:
        return psi.copy()
    if step is None:
        bound = sp.linalg.norm(generator, 1)
        step = 0.02 / max(bound, 1e-300)
    for _ in range(12):
        n_steps = max(1, int(np.ceil(abs(t) / step)))
        h = t / n_steps
        y = psi.copy()
        for _ in range(n_steps):
            k1 = generator @ y
            k2 = generator @ (y + 0.5 * h * k1)
            k3 = generator @ (y + 0.5 * h * k2)
            k4 = generator @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(np.linalg.norm(y) - 1.0) < NORM_TOL:
            return y
        step = abs(h) / 2
    raise NumericRangeError("RK4 integration could not preserve the norm to 1e-10")


@lru_cache(maxsize=64)
def _evolved_vacuum_cached(g: CouplingMatrix, t: float, cutoff: int, step: float | None) -> np.ndarray:
    h = hamiltonian(g, cutoff)
    generator = (-1j * h).real.tocsr()
    dim = h.shape[0]
    vac = np.zeros(dim)
    vac[0] = 1.0
    if dim <= DENSE_LIMIT:
        psi = scipy.linalg.expm(generator.toarray() * t) @ vac
    else:
        psi = _rk4(generator, vac, t, step)
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > NORM_TOL:
        raise NumericRangeError(f"state norm drifted to {norm:.12g}")
    psi.setflags(write=False)
    return psi


def evolved_vacuum(g: CouplingMatrix, t: float, cutoff: int, time_step: float | None = None) -> np.ndarray:
    """Real amplitude vector of exp(-iHt)|0>; mode 0 is the most significant index."""
    return _evolved_vacuum_cached(g, float(t), int(cutoff), time_step)


def _check(g: CouplingMatrix, t: float, cfg: FockConfig):
    if g.size != cfg.mode_count:
        raise InvalidArgumentError(f"config has {cfg.mode_count} modes, coupling matrix {g.size}")
    lam_max = float(np.max(np.abs(np.linalg.eigvalsh(g.entries))))
    if lam_max * abs(t) > cfg.max_exponent:
        raise OutOfRangeError(f"|lambda_max*t| = {lam_max * abs(t):.4g} > {cfg.max_exponent} (truncation unsafe)")


def _variance(psi: np.ndarray, q: JointQuadrature, cutoff: int) -> float:
    ops = _ladder_ops(q.n_modes, cutoff)
    s2 = np.sqrt(2.0)
    op = sp.csr_matrix(ops[0].shape, dtype=complex)
    for k, a in enumerate(ops):
        if q.x[k]:
            op = op + q.x[k] * (a + a.T) / s2
        if q.p[k]:
            op = op + q.p[k] * 1j * (a.T - a) / s2
    q_psi = op @ psi
    mean = np.vdot(psi, q_psi).real
    return float(np.vdot(q_psi, q_psi).real - mean**2)


def exact_variance(g: CouplingMatrix, q: JointQuadrature, t: float, cfg: FockConfig) -> tuple[float, bool]:
    """Variance of q in the evolved vacuum, plus a cutoff-convergence flag."""
    _check(g, t, cfg)
    if q.n_modes != g.size:
        raise InvalidArgumentError("quadrature dimension does not match coupling matrix")
    results = []
    for c in (cfg.cutoff, cfg.cutoff + cfg.recheck_increment):
        results.append(_variance(evolved_vacuum(g, t, c, cfg.time_step), q, c))
    return results[0], abs(results[1] - results[0]) < CONVERGENCE_TOL


def exact_photon_number(g: CouplingMatrix, mode: int, t: float, cfg: FockConfig) -> float:
    _check(g, t, cfg)
    if not 0 <= mode < g.size:
        raise InvalidArgumentError("mode index out of range")
    a = _ladder_ops(g.size, cfg.cutoff)[mode]
    v = a @ evolved_vacuum(g, t, cfg.cutoff, cfg.time_step)
    return float(v @ v)
