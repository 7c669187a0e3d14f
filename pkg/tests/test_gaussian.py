import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cvconcur import gaussian as gc
from cvconcur.errors import InvalidArgumentError, NumericRangeError

KAPPA = 0.7


def sym_eigs(matrix):
    """Exact eigenvalues via sympy, as floats sorted descending."""
    vals = sp.Matrix(matrix).eigenvals()
    out = []
    for v, mult in vals.items():
        out += [float(v)] * mult
    return sorted(out, reverse=True)


symmetric = st.integers(1, 5).flatmap(
    lambda n: arrays(float, (n, n), elements=st.floats(-2, 2, allow_nan=False)).map(lambda a: gc.CouplingMatrix(a + a.T))
)


class TestCouplingMatrix:
    def test_symmetrized_exactly(self):
        g = gc.CouplingMatrix([[0.0, 1.0], [1.0 + 1e-14, 0.0]])
        assert np.array_equal(g.entries, g.entries.T)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidArgumentError):
            gc.CouplingMatrix([[0, 1], [0.5, 0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidArgumentError):
            gc.CouplingMatrix([[np.inf]])

    def test_complete_graph_entries(self):
        assert np.array_equal(gc.complete_graph_coupling(2, KAPPA).entries, [[0, KAPPA], [KAPPA, 0]])

    def test_complete_graph_needs_two_modes(self):
        with pytest.raises(InvalidArgumentError):
            gc.complete_graph_coupling(1, 1.0)


class TestEigenmodes:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_complete_graph_spectrum_matches_exact(self, n):
        g = gc.complete_graph_coupling(n, KAPPA)
        exact = sym_eigs([[0 if i == j else sp.Rational(7, 10) for j in range(n)] for i in range(n)])
        np.testing.assert_allclose(gc.eigenmodes(g).eigenvalues, exact, rtol=1e-12)

    def test_h3_classification(self):
        rep = gc.eigenmodes(gc.complete_graph_coupling(3, KAPPA))
        assert rep.classes[0] is gc.ModeClass.P_SQUEEZED
        np.testing.assert_allclose(rep.eigenvectors[:, 0], np.ones(3) / math.sqrt(3), atol=1e-12)
        assert rep.rate(0) == pytest.approx(2 * KAPPA)
        for k in (1, 2):
            assert rep.classes[k] is gc.ModeClass.X_SQUEEZED
            assert rep.eigenvectors[:, k] @ np.ones(3) == pytest.approx(0, abs=1e-12)
            assert rep.rate(k) == pytest.approx(KAPPA)

    def test_chain_constant_of_motion(self):
        rep = gc.eigenmodes(gc.chain_coupling(3, KAPPA))
        exact = sym_eigs([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        np.testing.assert_allclose(rep.eigenvalues, np.array(exact) * KAPPA, atol=1e-12)
        assert rep.classes == (gc.ModeClass.P_SQUEEZED, gc.ModeClass.CONSTANT, gc.ModeClass.X_SQUEEZED)
        np.testing.assert_allclose(rep.eigenvectors[:, 1], np.array([1, 0, -1]) / math.sqrt(2), atol=1e-12)

    def test_zero_matrix(self):
        rep = gc.eigenmodes(gc.CouplingMatrix(np.zeros((3, 3))))
        assert np.all(rep.eigenvalues == 0)
        assert rep.count(gc.ModeClass.CONSTANT) == 3

    def test_squeezed_operator_variance_law(self):
        g = gc.complete_graph_coupling(4, KAPPA)
        rep = gc.eigenmodes(g)
        state = gc.evolve(gc.GaussianState.vacuum(4), g, 0.8)
        for k in range(4):
            assert gc.joint_variance(state, rep.squeezed_operator(k)) == pytest.approx(rep.vacuum_variance(k, 0.8), rel=1e-10)

    @given(symmetric)
    def test_report_invariants(self, g):
        rep = gc.eigenmodes(g)
        v = rep.eigenvectors
        np.testing.assert_allclose(v.T @ v, np.eye(g.size), atol=1e-10)
        recon = v @ np.diag(rep.eigenvalues) @ v.T
        assert np.linalg.norm(recon - g.entries) <= 1e-10 * max(np.linalg.norm(g.entries), 1.0)
        assert list(rep.eigenvalues) == sorted(rep.eigenvalues, reverse=True)
        radius = np.max(np.abs(rep.eigenvalues))
        n_pos = sum(1 for lam in rep.eigenvalues if lam > rep.zero_tol * radius)
        assert rep.count(gc.ModeClass.P_SQUEEZED) == n_pos

    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_complete_graph_single_positive_mode(self, n):
        assert gc.eigenmodes(gc.complete_graph_coupling(n, 1.0)).count(gc.ModeClass.P_SQUEEZED) == 1


class TestPropagator:
    def test_identity_at_zero(self):
        g = gc.complete_graph_coupling(3, KAPPA)
        assert np.array_equal(gc.propagator(g, 0.0), np.eye(6))

    def test_h1_x_difference(self):
        s = gc.propagator(gc.complete_graph_coupling(2, KAPPA), 1.3)
        v = np.array([1.0, -1.0])
        np.testing.assert_allclose(s[:2, :2] @ v, math.exp(-KAPPA * 1.3) * v, rtol=1e-12)

    def test_h3_p_sum(self):
        s = gc.propagator(gc.complete_graph_coupling(3, KAPPA), 0.9)
        v = np.ones(3)
        np.testing.assert_allclose(s[3:, 3:] @ v, math.exp(-2 * KAPPA * 0.9) * v, rtol=1e-12)

    @given(symmetric, st.floats(-3, 3))
    def test_symplectic(self, g, t):
        s = gc.propagator(g, t)
        om = gc.symplectic_form(g.size)
        np.testing.assert_allclose(s @ om @ s.T, om, atol=1e-10 * max(1.0, np.abs(s).max() ** 2))

    def test_cap(self):
        with pytest.raises(NumericRangeError, match="eigenvalue 2"):
            gc.propagator(gc.complete_graph_coupling(3, 1.0), 26.0)

    def test_negative_time_inverts(self):
        g = gc.complete_graph_coupling(3, KAPPA)
        np.testing.assert_allclose(gc.propagator(g, 0.4) @ gc.propagator(g, -0.4), np.eye(6), atol=1e-12)


class TestEvolve:
    def test_vacuum_fixed_by_null_dynamics(self):
        vac = gc.GaussianState.vacuum(3)
        out = gc.evolve(vac, gc.CouplingMatrix(np.zeros((3, 3))), 5.0)
        assert np.array_equal(out.cov, vac.cov)

    def test_h3_psum_example(self):
        state = gc.evolve(gc.GaussianState.vacuum(3), gc.complete_graph_coupling(3, 1.0), 0.5)
        var = gc.joint_variance(state, gc.JointQuadrature.p_only(np.ones(3)))
        assert var == pytest.approx(1.5 * math.exp(-2), rel=1e-12)
        assert var == pytest.approx(0.203, abs=5e-4)

    def test_h1_epr_product(self):
        t = 0.83
        state = gc.evolve(gc.GaussianState.vacuum(2), gc.complete_graph_coupling(2, KAPPA), t)
        minus = gc.joint_variance(state, gc.JointQuadrature.x_only([1, -1]))
        plus = gc.joint_variance(state, gc.JointQuadrature.x_only([1, 1]))
        assert minus == pytest.approx(math.exp(-2 * KAPPA * t), rel=1e-12)
        assert plus == pytest.approx(math.exp(2 * KAPPA * t), rel=1e-12)
        assert minus * plus == pytest.approx(1.0, rel=1e-12)

    @given(symmetric, st.floats(-2, 2), st.floats(-2, 2))
    @settings(max_examples=50)
    def test_group_property(self, g, t1, t2):
        scale = max(1.0, np.abs(np.linalg.eigvalsh(g.entries)).max())
        t1, t2 = t1 / scale, t2 / scale
        vac = gc.GaussianState.vacuum(g.size)
        a = gc.evolve(gc.evolve(vac, g, t1), g, t2)
        b = gc.evolve(vac, g, t1 + t2)
        np.testing.assert_allclose(a.cov, b.cov, rtol=1e-9, atol=1e-9)

    @given(symmetric, st.floats(0, 2))
    @settings(max_examples=50)
    def test_purity_and_uncertainty(self, g, t):
        t /= max(1.0, np.abs(np.linalg.eigvalsh(g.entries)).max())
        state = gc.evolve(gc.GaussianState.vacuum(g.size), g, t)
        assert state.purity_determinant() == pytest.approx(1.0, rel=1e-8)
        assert state.is_physical()

    @given(symmetric, st.floats(0, 2))
    @settings(max_examples=50)
    def test_eigenmodes_saturate_heisenberg(self, g, t):
        # keep exp(2|lambda|t) well inside double precision
        t /= max(1.0, np.abs(np.linalg.eigvalsh(g.entries)).max())
        state = gc.evolve(gc.GaussianState.vacuum(g.size), g, t)
        rep = gc.eigenmodes(g)
        for k in range(g.size):
            v = rep.eigenvectors[:, k]
            vx = gc.joint_variance(state, gc.JointQuadrature.x_only(v))
            vp = gc.joint_variance(state, gc.JointQuadrature.p_only(v))
            assert vx * vp == pytest.approx(0.25, rel=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            gc.evolve(gc.GaussianState.vacuum(2), gc.complete_graph_coupling(3, 1.0), 0.1)

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_asymmetric_rates(self, n):
        g = gc.complete_graph_coupling(n, 1.0)
        t = 0.4
        state = gc.evolve(gc.GaussianState.vacuum(n), g, t)
        psum = gc.joint_variance(state, gc.JointQuadrature.p_only(np.ones(n)))
        xd = gc.joint_variance(state, gc.JointQuadrature.x_only(np.eye(n)[0] - np.eye(n)[1]))
        rate_p = -math.log(psum / (n / 2)) / (2 * t)
        rate_x = -math.log(xd) / (2 * t)
        assert rate_p / rate_x == pytest.approx(n - 1, rel=1e-10)


class TestJointVariance:
    def test_single_quadrature(self):
        assert gc.joint_variance(gc.GaussianState.vacuum(2), gc.JointQuadrature.x_only([1, 0])) == 0.5

    def test_vacuum_p_sum(self):
        assert gc.joint_variance(gc.GaussianState.vacuum(3), gc.JointQuadrature.p_only([1, 1, 1])) == pytest.approx(1.5)

    def test_rejects_zero_quadrature(self):
        with pytest.raises(InvalidArgumentError):
            gc.JointQuadrature([0, 0], [0, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            gc.joint_variance(gc.GaussianState.vacuum(2), gc.JointQuadrature.x_only([1, 0, 0]))


class TestNetworks:
    def test_identity(self):
        g = gc.complete_graph_coupling(3, KAPPA)
        assert gc.apply_network(g, gc.PassiveNetwork(np.eye(3))) == g

    def test_balanced_beam_splitter(self):
        u = gc.PassiveNetwork(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
        out = gc.apply_network(gc.single_mode_squeezers([-KAPPA, KAPPA]), u)
        np.testing.assert_allclose(out.entries, [[0, -KAPPA], [-KAPPA, 0]], atol=1e-15)

    def test_tritter(self):
        out = gc.apply_network(gc.single_mode_squeezers([-KAPPA, KAPPA, KAPPA]), gc.make_nsplitter(3))
        expected = KAPPA * (np.eye(3) - 2 / 3 * np.ones((3, 3)))
        np.testing.assert_allclose(out.entries, expected, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 9])
    def test_nsplitter(self, n):
        u = gc.make_nsplitter(n)
        np.testing.assert_allclose(u.matrix @ u.matrix.T, np.eye(n), atol=1e-12)
        np.testing.assert_allclose(u.matrix[:, 0], np.ones(n) / math.sqrt(n), atol=1e-15)
        g = gc.vlb_coupling(n, KAPPA)
        np.testing.assert_allclose(np.diag(g.entries), (n - 2) * KAPPA / n, atol=1e-12)
        off = g.entries[~np.eye(n, dtype=bool)]
        np.testing.assert_allclose(off, -2 * KAPPA / n, atol=1e-12)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(g.entries)), [-KAPPA] + [KAPPA] * (n - 1), atol=1e-10)

    def test_nsplitter_needs_two_ports(self):
        with pytest.raises(InvalidArgumentError):
            gc.make_nsplitter(1)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(InvalidArgumentError):
            gc.PassiveNetwork([[1, 1], [0, 1]])

    @given(symmetric, st.integers(0, 2**31 - 1))
    @settings(max_examples=50)
    def test_spectrum_invariant(self, g, seed):
        q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(g.size, g.size)))
        out = gc.apply_network(g, gc.PassiveNetwork(q))
        np.testing.assert_allclose(np.linalg.eigvalsh(out.entries), np.linalg.eigvalsh(g.entries), atol=1e-10)


class TestWitness:
    def test_vacuum(self):
        value, threshold = gc.witness_pair(gc.GaussianState.vacuum(3), 0, 1, [1.0])
        assert value == pytest.approx(2.5)
        assert threshold == 1.0
        assert not value < threshold

    def test_h3_analytic_and_decreasing(self):
        g = gc.complete_graph_coupling(3, 1.0)
        values = []
        for kt in np.linspace(0, 2, 41):
            state = gc.evolve(gc.GaussianState.vacuum(3), g, kt)
            for i, j in ((0, 1), (0, 2), (1, 2)):
                v, _ = gc.witness_pair(state, i, j)
                assert v == pytest.approx(math.exp(-2 * kt) + 1.5 * math.exp(-4 * kt), rel=1e-12)
            values.append(v)
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 0.02

    def test_chain_never_violates(self):
        g = gc.chain_coupling(3, 1.0)
        for kt in np.linspace(0, 5, 26):
            v, th = gc.witness_pair(gc.evolve(gc.GaussianState.vacuum(3), g, kt), 0, 2, [1.0])
            assert v >= 1.0 - 1e-12

    def test_same_mode_rejected(self):
        with pytest.raises(InvalidArgumentError):
            gc.witness_pair(gc.GaussianState.vacuum(3), 1, 1)

    def test_wrong_gain_count(self):
        with pytest.raises(InvalidArgumentError):
            gc.witness_pair(gc.GaussianState.vacuum(3), 0, 1, [1.0, 1.0])


def test_dump_matrix_round_trip():
    m = np.array([[1 / 3, -2 / 3], [math.pi, 1e-300]])
    text = gc.dump_matrix(m)
    back = np.array([[float(v) for v in line.split(",")] for line in text.splitlines()])
    assert np.array_equal(back, m)
