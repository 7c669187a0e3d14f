"""Cross-check of the covariance propagator against the Fock-space oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import fock, gaussian

KAPPA_T = (0.1, 0.2, 0.3)
TOLERANCE = 1e-3


@dataclass(frozen=True)
class CaseResult:
    scenario: str
    kappa_t: float
    quadrature: str
    gaussian: float
    oracle: float
    converged: bool

    @property
    def error(self) -> float:
        return abs(self.gaussian - self.oracle)

    @property
    def ok(self) -> bool:
        return self.converged and self.error <= TOLERANCE


def scenarios(quick: bool = False) -> list[tuple[str, gaussian.CouplingMatrix]]:
    out = [
        ("squeezer", gaussian.single_mode_squeezers([1.0])),
        ("h1", gaussian.complete_graph_coupling(2, 1.0)),
    ]
    if not quick:
        out += [
            ("h3", gaussian.complete_graph_coupling(3, 1.0)),
            ("h2_chain", gaussian.chain_coupling(3, 1.0)),
        ]
    return out


def quadratures(n: int) -> list[gaussian.JointQuadrature]:
    """Single-mode X and P, pairwise sums and differences, total X and P."""
    eye = np.eye(n)
    qs = []
    for k in range(n):
        qs.append(gaussian.JointQuadrature.x_only(eye[k], f"X{k + 1}"))
        qs.append(gaussian.JointQuadrature.p_only(eye[k], f"P{k + 1}"))
    for i, j in itertools.combinations(range(n), 2):
        qs.append(gaussian.JointQuadrature.x_only(eye[i] - eye[j], f"X{i + 1}-X{j + 1}"))
        qs.append(gaussian.JointQuadrature.x_only(eye[i] + eye[j], f"X{i + 1}+X{j + 1}"))
        qs.append(gaussian.JointQuadrature.p_only(eye[i] + eye[j], f"P{i + 1}+P{j + 1}"))
        qs.append(gaussian.JointQuadrature.p_only(eye[i] - eye[j], f"P{i + 1}-P{j + 1}"))
    if n > 2:
        qs.append(gaussian.JointQuadrature.x_only(np.ones(n), "Xsum"))
        qs.append(gaussian.JointQuadrature.p_only(np.ones(n), "Psum"))
    return qs


def run(quick: bool = False, kappa_t=KAPPA_T) -> list[CaseResult]:
    results = []
    for name, g in scenarios(quick):
        cfg = fock.FockConfig(g.size)
        for kt in kappa_t:
            state = gaussian.evolve(gaussian.GaussianState.vacuum(g.size), g, kt)
            for q in quadratures(g.size):
                value, converged = fock.exact_variance(g, q, kt, cfg)
                results.append(CaseResult(name, kt, q.name, gaussian.joint_variance(state, q), value, converged))
    return results
