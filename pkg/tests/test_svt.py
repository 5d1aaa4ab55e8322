import math

import numpy as np
import pytest
import scipy.stats

from svtkit import ChebSeries, ParityPoly
from svtkit.blockenc import (BlockEncoding, Projector, ProjectedUnitary,
                             embed, operator_norm)
from svtkit.errors import Inadmissible, ParityMismatch
from svtkit.qsp import chebyshev_phases, complete, complete_complex
from svtkit.svt import (alternating_sequence, eigenvalue_transform,
                        invariant_decomposition, reference_svt,
                        robustness_bound, svd_bundle, svt_apply)

rng = np.random.default_rng(11)


def random_unitary(n):
    return scipy.stats.unitary_group.rvs(n, random_state=rng)


def random_pu(dim=8, rank_pi=3, rank_pit=3):
    u = random_unitary(dim)
    pi = Projector(dim, indices=range(rank_pi))
    pit = Projector(dim, indices=range(rank_pit))
    return ProjectedUnitary(u, pi, pit)


def cheb_unit(d):
    c = np.zeros(d + 1)
    c[d] = 1.0
    return ChebSeries(c)


def random_target(deg, supnorm=0.9):
    c = rng.standard_normal(deg + 1)
    c[(deg % 2) ^ 1::2] = 0.0
    xs = np.cos(np.linspace(0, np.pi, 2001))
    c *= supnorm / np.abs(np.polynomial.chebyshev.chebval(xs, c)).max()
    return ChebSeries(c)


class TestReferenceSvt:
    def test_identity_function(self):
        a = rng.standard_normal((4, 4)) * 0.3
        got = reference_svt(a, lambda x: x, "odd")
        np.testing.assert_allclose(got, a, atol=1e-12)

    def test_even_square(self):
        a = rng.standard_normal((4, 4)) * 0.3 + 1j * rng.standard_normal((4, 4)) * 0.2
        got = reference_svt(a, lambda x: x ** 2, "even")
        np.testing.assert_allclose(got, a.conj().T @ a, atol=1e-12)

    def test_t3_diagonal(self):
        a = np.diag([0.2, 0.5])
        got = reference_svt(a, cheb_unit(3), "odd")
        t3 = lambda x: 4 * x ** 3 - 3 * x
        np.testing.assert_allclose(got, np.diag([t3(0.2), t3(0.5)]), atol=1e-12)

    def test_parity_mismatch(self):
        with pytest.raises(ParityMismatch):
            reference_svt(np.eye(2) * 0.5, cheb_unit(3), "even")

    def test_odd_preserves_kernel(self):
        a = np.zeros((3, 3))
        a[0, 0] = 0.6
        got = reference_svt(a, cheb_unit(3), "odd")
        assert operator_norm(got[:, 1:]) < 1e-12


class TestInvariantDecomposition:
    def test_rank_one_rotation(self):
        # U = R(x) (+) I with rank-1 projectors: single 2d block, sigma = x
        x = 0.42
        s = math.sqrt(1 - x * x)
        u = np.eye(4, dtype=complex)
        u[0, 0], u[0, 1], u[1, 0], u[1, 1] = x, s, s, -x
        pu = ProjectedUnitary(u, Projector(4, indices=[0]),
                              Projector(4, indices=[0]))
        dec = invariant_decomposition(pu)
        assert len(dec.blocks) == 1
        assert dec.blocks[0][0] == pytest.approx(x, abs=1e-12)
        assert dec.two_by_two_defect(u) < 1e-12

    def test_random_orthonormality(self):
        pu = random_pu(8, 3, 4)
        dec = invariant_decomposition(pu)
        assert dec.gram_defect() < 1e-10
        assert dec.gram_defect_tilde() < 1e-10
        assert dec.two_by_two_defect(pu.u) < 1e-10

    def test_saturated_direction(self):
        # U with an exact invariant direction inside both projectors
        u = np.eye(4, dtype=complex)
        u[2:, 2:] = random_unitary(2)
        pu = ProjectedUnitary(u, Projector(4, indices=[0, 1]),
                              Projector(4, indices=[0, 1]))
        dec = invariant_decomposition(pu)
        assert len(dec.saturated) == 2
        for psi, psit in dec.saturated:
            np.testing.assert_allclose(u @ psi, psit, atol=1e-10)


class TestAlternatingSequence:
    def test_single_phase_identity_poly(self):
        pu = random_pu(8, 3, 3)
        seq = chebyshev_phases(1)
        u_phi, ledger = alternating_sequence(pu, seq)
        got = pu.pi_tilde.matrix() @ u_phi @ pu.pi.matrix()
        np.testing.assert_allclose(got, pu.encoded(), atol=1e-12)
        assert ledger["u_uses"] == 1

    def test_chebyshev_t2(self):
        pu = random_pu(8, 3, 3)
        seq = chebyshev_phases(2)
        u_phi, _ = alternating_sequence(pu, seq)
        got = pu.pi.matrix() @ u_phi @ pu.pi.matrix()
        want = reference_svt(pu.encoded(), cheb_unit(2), "even",
                             pi=pu.pi, pi_tilde=pu.pi_tilde)
        assert operator_norm(got - want) < 1e-10

    def test_chebyshev_t5_odd(self):
        pu = random_pu(10, 4, 4)
        seq = chebyshev_phases(5)
        u_phi, ledger = alternating_sequence(pu, seq)
        got = pu.pi_tilde.matrix() @ u_phi @ pu.pi.matrix()
        want = reference_svt(pu.encoded(), cheb_unit(5), "odd",
                             pi=pu.pi, pi_tilde=pu.pi_tilde)
        assert operator_norm(got - want) < 1e-10
        assert ledger["u_uses"] == 5

    def test_pi_half_pair_on_projection(self):
        # degree-2 sequence (pi/2, -pi/2) realizes T_2: equals 1 on the
        # saturated directions of a Hermitian-unitary block
        u = np.zeros((4, 4), complex)
        u[:2, :2] = np.array([[0, 1], [1, 0]])  # sigma_x on img(Pi)
        u[2:, 2:] = random_unitary(2)
        pu = ProjectedUnitary(u, Projector(4, indices=[0, 1]),
                              Projector(4, indices=[0, 1]))
        from svtkit.qsp import PhaseSequence
        seq = PhaseSequence(np.array([math.pi / 2, -math.pi / 2]), "reflection")
        u_phi, _ = alternating_sequence(pu, seq)
        got = pu.pi.matrix() @ u_phi @ pu.pi.matrix()
        np.testing.assert_allclose(got, pu.pi.matrix(), atol=1e-10)


class TestSvtApply:
    def test_real_sign_rank_one(self):
        # rank-1 A = a |psi_G><psi_0|: sign transform amplifies to ~1
        from svtkit.approx import approx_sign
        dim = 8
        u = random_unitary(dim)
        psi0 = np.zeros(dim); psi0[0] = 1.0
        pi = Projector(dim, matrix=np.outer(psi0, psi0))
        out_vec = u @ psi0
        # target projector onto a subspace containing u psi0 partially
        v = np.zeros(dim); v[1] = 1.0
        g = out_vec * 0.4 + v * math.sqrt(1 - 0.4 ** 2) * 0
        pit = Projector(dim, indices=[0, 1, 2])
        pu = ProjectedUnitary(u, pi, pit)
        a_val = operator_norm(pu.encoded())
        if a_val < 0.3:
            pytest.skip("random overlap too small for this seed")
        res = approx_sign(0.25, 1e-3)
        outcome = svt_apply(pu, res.cheb, kind="real_poly", delta=1e-6)
        oracle = reference_svt(pu.encoded(), res.cheb, "odd",
                               pi=pu.pi, pi_tilde=pu.pi_tilde)
        assert operator_norm(outcome.result - oracle) < 1e-7

    def test_real_random_poly(self):
        pu = random_pu(8, 3, 3)
        tgt = random_target(7)
        outcome = svt_apply(pu, tgt, kind="real_poly", delta=1e-8)
        assert outcome.measured_error < 1e-8

    def test_complex_from_completion(self):
        pu = random_pu(8, 3, 3)
        pair = complete(random_target(5).cheb_coeffs.real)
        outcome = svt_apply(pu, pair, kind="complex_poly")
        assert outcome.measured_error < 1e-8
        assert outcome.ledger["u_uses"] == 5

    def test_even_degree_routes_through_pi(self):
        pu = random_pu(8, 3, 5)
        tgt = random_target(6)
        outcome = svt_apply(pu, tgt, kind="real_poly", delta=1e-8)
        want = reference_svt(pu.encoded(), tgt, "even",
                             pi=pu.pi, pi_tilde=pu.pi_tilde)
        assert operator_norm(outcome.result - want) < 1e-8

    def test_inadmissible_rejected(self):
        pu = random_pu(4, 2, 2)
        with pytest.raises(Inadmissible):
            svt_apply(pu, ParityPoly([0, 1.4]), kind="real_poly")


class TestCompleteComplex:
    def test_t7(self):
        pair = complete_complex(cheb_unit(7))
        assert pair.unitarity_defect() < 1e-8

    def test_matches_real_completion_pipeline(self):
        tgt = random_target(6, supnorm=0.8)
        pair = complete(tgt)  # P complex now
        pair2 = complete_complex(ChebSeries(pair.p_cheb))
        assert pair2.unitarity_defect() < 1e-8


class TestEigenvalueTransform:
    def test_linear_map(self):
        h = rng.standard_normal((4, 4))
        h = (h + h.T) / 2
        h /= 2 * operator_norm(h)
        be = embed(h, 1.0)
        tgt = ParityPoly([0, 0.5])
        out = eigenvalue_transform(be, tgt, delta=1e-8)
        np.testing.assert_allclose(out.result, h / 2, atol=1e-8)

    def test_mixed_parity_polynomial(self):
        h = rng.standard_normal((4, 4))
        h = (h + h.T) / 2
        h /= 2.5 * operator_norm(h)
        be = embed(h, 1.0)
        c = np.array([0.1, 0.15, 0.1, 0.05])  # mixed parity, sup < 1/2
        out = eigenvalue_transform(be, ChebSeries(c), delta=1e-8)
        w, v = np.linalg.eigh(h)
        want = v @ np.diag(np.polynomial.chebyshev.chebval(w, c)) @ v.conj().T
        np.testing.assert_allclose(out.result, want, atol=1e-7)


class TestRobustness:
    def test_scalar_chebyshev_footnote(self):
        d = 50
        x, y = 1.0, 1.0 - 1.0 / (2 * d * d)
        td = lambda z: math.cos(d * math.acos(min(1.0, z)))
        measured = abs(td(x) - td(y))
        bound = robustness_bound(np.array([[x]]), np.array([[y]]),
                                 "poly_sqrt", degree=d)
        assert measured <= bound
        assert 0.44 <= measured <= 0.48
        assert bound >= 2 * math.sqrt(2) - 1e-9

    def test_zero_distance(self):
        a = rng.standard_normal((3, 3)) * 0.3
        assert robustness_bound(a, a, "modulus", omega=lambda t: t) == 0.0
        assert robustness_bound(a, a, "poly_sqrt", degree=5) == 0.0

    def test_poly_linear_dominates_measured(self):
        n = 9
        a = rng.standard_normal((4, 4)); a *= 0.5 / operator_norm(a)
        e = rng.standard_normal((4, 4)); e *= 1e-3 / operator_norm(e)
        at = a + e
        tgt = random_target(n, supnorm=0.9)
        pa = reference_svt(a, tgt, "odd")
        pat = reference_svt(at, tgt, "odd")
        measured = operator_norm(pa - pat)
        bound = robustness_bound(a, at, "poly_linear", degree=n)
        assert measured <= bound

    def test_poly_linear_precondition(self):
        a = np.eye(2)
        with pytest.raises(Inadmissible):
            robustness_bound(a, a * 0.999, "poly_linear", degree=3)


class TestCircuitOracleAgreement:
    @pytest.mark.parametrize("trial", range(10))
    def test_randomized(self, trial):
        dim = int(rng.integers(4, 12))
        rk = int(rng.integers(1, dim // 2 + 1))
        rkt = int(rng.integers(1, dim // 2 + 1))
        pu = random_pu(dim, rk, rkt)
        deg = int(rng.integers(1, 14))
        tgt = random_target(deg, supnorm=0.95)
        outcome = svt_apply(pu, tgt, kind="real_poly", delta=1e-8)
        assert outcome.measured_error <= 1e-8


class TestComplexEigenvalueTransform:
    def test_quarter_bounded_complex(self):
        h = rng.standard_normal((3, 3))
        h = (h + h.T) / 2
        h /= 2 * operator_norm(h)
        be = embed(h, 1.0)
        c = np.array([0.05 + 0.02j, 0.08 - 0.04j, 0.06 + 0.03j])
        out = eigenvalue_transform(be, ChebSeries(c), delta=1e-8,
                                   complex_target=True)
        w, v = np.linalg.eigh(h)
        want = v @ np.diag(np.polynomial.chebyshev.chebval(w, c)) @ v.conj().T
        assert operator_norm(out.result - want) <= 1e-7

    def test_quarter_bound_enforced(self):
        h = np.diag([0.3, -0.2])
        be = embed(h, 1.0)
        with pytest.raises(Inadmissible):
            eigenvalue_transform(be, ChebSeries(np.array([0.3 + 0.2j])),
                                 complex_target=True)


class TestParityNecessity:
    def test_even_transform_stays_right_sided(self):
        # with disjoint projectors the even transform has no left-right
        # component: the reference lives in Pi..Pi and its Pi~-sandwich
        # vanishes, while the raw circuit cross-block is junk
        u = random_unitary(8)
        pi = Projector(8, indices=[0, 1, 2])
        pit = Projector(8, indices=[4, 5, 6])
        pu = ProjectedUnitary(u, pi, pit)
        c = np.zeros(5)
        c[0], c[2], c[4] = 0.2, 0.3, 0.25
        outcome = svt_apply(pu, ChebSeries(c), kind="real_poly", delta=1e-7)
        assert outcome.measured_error <= 1e-9  # routed through Pi .. Pi
        ref = reference_svt(pu.encoded(), ChebSeries(c), "even",
                            pi=pu.pi, pi_tilde=pu.pi_tilde)
        cross = pit.matrix() @ ref @ pi.matrix()
        assert operator_norm(cross) <= 1e-12
