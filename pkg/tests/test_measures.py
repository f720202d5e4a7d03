import numpy as np
import pytest
import scipy.linalg as sla

from ideal_amg.coarsening import Prolongation, cf_splitting, general_p
from ideal_amg.errors import MsNotSpd, SingularSmoother, SmootherNotAConvergent, ZeroVector
from ideal_amg.ideal import ideal_p0_direct
from ideal_amg.linalg import a_norm, sqrt_spd
from ideal_amg.measures import (
    Smoother,
    build_ax_bx,
    k_measure,
    k_tg,
    measure_report,
    mu_star,
    mu_x,
    p_sharp,
    pi_m_tilde,
    smoother_constants,
    spectral_equiv_constants,
    theta_angle,
    worst_case_mu,
)
from ideal_amg.suites import random_decomposition, random_smoother, random_spd
from ideal_amg.twogrid import TgSetup, build_e_tg


def pencil_max(lhs, rhs):
    return sla.eigh(lhs, rhs, eigvals_only=True)[-1]


def random_case(rng, kind=None):
    n = int(rng.integers(3, 10))
    a = random_spd(rng, n, cond=1e2)
    d = random_decomposition(rng, n, kind=kind or ("cf" if rng.random() < 0.5 else "general"))
    p = general_p(a, d, rng.standard_normal((n, d.n_c)))
    return a, d, p


class TestSmoother:
    def test_flags(self, ex):
        sm = Smoother(ex.m, ex.a)
        assert sm.a_convergent
        np.testing.assert_allclose(sm.m_tilde.array, 6.25 * np.linalg.inv(5 * np.eye(3) - ex.a))
        assert not Smoother(0.5 * np.eye(3), ex.a).a_convergent

    def test_singular(self, ex):
        with pytest.raises(SingularSmoother):
            Smoother(np.diag([1.0, 1.0, 0.0]), ex.a)

    def test_require(self, ex):
        with pytest.raises(SmootherNotAConvergent):
            k_measure(ex.a, 0.5 * np.eye(3), ex.p @ ex.d.r)

    def test_named_constructors(self, spd):
        a = spd(5, cond=10)
        assert Smoother.gauss_seidel(a).a_convergent
        np.testing.assert_allclose(Smoother.weighted_jacobi(a).m, np.diag(np.diag(a)) / 0.8)


class TestMuX:
    def test_hand_value(self, ex):
        # numerator e^T X e = 4, denominator e^T A e = 2
        assert mu_x(ex.a, ex.x, ex.p @ ex.d.r, [1.0, 1.0, 0.0]) == pytest.approx(2.0, abs=1e-15)

    def test_range_of_p(self, ex):
        assert mu_x(ex.a, ex.x, ex.p @ ex.d.r, ex.p[:, 0]) == 0.0

    def test_x_equals_a(self, spd, rng):
        a = spd(4)
        assert mu_x(a, a, np.zeros((4, 4)), rng.standard_normal(4)) == pytest.approx(1.0)

    def test_zero_vector(self, ex):
        with pytest.raises(ZeroVector):
            mu_x(ex.a, ex.x, np.eye(3), np.zeros(3))


class TestAxBx:
    def test_hand_values(self, ex):
        ax, bx, _ = build_ax_bx(ex.a, ex.x, ex.d, ex.p)
        np.testing.assert_allclose(ax, [[1, -0.5], [-0.5, 1]], atol=1e-15)
        np.testing.assert_allclose(bx, [[0.75, -0.25], [-0.25, 0.75]], atol=1e-15)

    def test_ideal_p_leaves_ax(self, rng):
        a, d, _ = random_case(rng)
        x = random_spd(rng, d.n, 10)
        ax, bx, _ = build_ax_bx(a, x, d, ideal_p0_direct(a, d))
        np.testing.assert_allclose(bx, ax, atol=1e-10 * np.abs(ax).max())
        ax, _, _ = build_ax_bx(a, a, d, ideal_p0_direct(a, d))
        np.testing.assert_allclose(ax, np.eye(d.n_s), atol=1e-10)

    def test_bx_below_ax(self, rng):
        for _ in range(30):
            a, d, p = random_case(rng)
            x = random_spd(rng, d.n, 10)
            ax, bx, _ = build_ax_bx(a, x, d, p)
            assert np.linalg.eigvalsh(ax - bx).min() >= -1e-10 * np.abs(ax).max()


class TestMuStar:
    def test_counter_example(self, ex):
        assert mu_star(ex.a, ex.x, ex.d) == pytest.approx(2.0, abs=1e-12)

    def test_x_equals_a(self, rng):
        a, d, _ = random_case(rng)
        assert mu_star(a, a, d) == pytest.approx(1.0, rel=1e-10)

    def test_diagonal(self):
        assert mu_star(np.diag([1.0, 4.0, 2.0]), np.eye(3), cf_splitting(3, [2])) == pytest.approx(1.0)


class TestWorstCase:
    def test_counter_example(self, ex):
        assert worst_case_mu(ex.a, ex.x, ex.d, ex.p) == pytest.approx(2.0, abs=1e-10)
        assert worst_case_mu(ex.a, ex.x, ex.d, ex.pstar) == pytest.approx(2.0, abs=1e-10)

    def test_full_space_oracle_and_lower_bound(self, rng):
        for _ in range(30):
            a, d, p = random_case(rng)
            x = random_spd(rng, d.n, 10)
            c = np.eye(d.n) - p.q
            ref = pencil_max(c.T @ x @ c, a)
            wc = worst_case_mu(a, x, d, p)
            assert wc == pytest.approx(ref, rel=1e-9)
            assert wc >= mu_star(a, x, d) * (1 - 1e-10)


class TestTwoGridConstants:
    def test_exact_smoother_and_ideal_q(self, rng):
        a, d, _ = random_case(rng)
        # M = A gives M~ = A; the A-orthogonal ideal projection then gives K = 1.
        assert k_measure(a, a, ideal_p0_direct(a, d).q) == pytest.approx(1.0, rel=1e-10)

    def test_counter_example_oracles(self, ex):
        sm = Smoother(ex.m, ex.a)
        mt = sm.m_tilde.array
        c = np.eye(3) - ex.p @ ex.d.r
        k = k_measure(ex.a, sm, ex.p @ ex.d.r)
        assert k == pytest.approx(pencil_max(c.T @ mt @ c, ex.a), rel=1e-12)
        assert k >= 1.0
        ktg = k_tg(ex.a, sm, ex.p)
        e_norm = a_norm(build_e_tg(TgSetup(ex.a, sm, ex.p)), ex.a)
        assert e_norm == pytest.approx(1 - 1 / ktg, abs=1e-12)

    def test_square_p(self, spd):
        a = spd(4, cond=10)
        sm = Smoother.gauss_seidel(a)
        assert k_tg(a, sm, np.eye(4)) == 1.0
        np.testing.assert_allclose(build_e_tg(TgSetup(a, sm, np.eye(4))), 0, atol=1e-12)

    def test_ordering(self, rng):
        for _ in range(30):
            a, d, p = random_case(rng)
            sm = random_smoother(rng, a)
            ktg = k_tg(a, sm, p)
            assert k_measure(a, sm, p.q) >= ktg * (1 - 1e-12)
            assert ktg >= 1 - 1e-12


class TestProjectorsAndAngles:
    def test_pi_identity_weight(self, rng):
        p = rng.standard_normal((5, 2))
        np.testing.assert_allclose(pi_m_tilde(p, np.eye(5)), p @ np.linalg.pinv(p), atol=1e-12)

    def test_pi_scalar_weight(self, ex):
        np.testing.assert_allclose(pi_m_tilde(ex.p, 3.0 * np.eye(3)), np.diag([0, 0, 1.0]))

    def test_pi_projection_properties(self, rng, spd):
        mt = spd(6, cond=30)
        p = rng.standard_normal((6, 2))
        pi = pi_m_tilde(p, mt)
        np.testing.assert_allclose(pi @ pi, pi, atol=1e-10)
        np.testing.assert_allclose(mt @ pi, (mt @ pi).T, atol=1e-10 * np.abs(mt).max())

    def test_p_sharp_examples(self, rng, ex):
        q, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        d = cf_splitting(5, [0, 1])
        np.testing.assert_allclose(p_sharp(np.eye(5), d).p, d.r.T)
        np.testing.assert_allclose(p_sharp(2.5 * np.eye(3), ex.d).p, ex.p)
        mt = random_spd(rng, 5, 20)
        d = random_decomposition(rng, 5, 2, kind="general")
        np.testing.assert_allclose(d.r @ p_sharp(mt, d).p, np.eye(2), atol=1e-10)

    def test_p_sharp_counter_example_smoother(self, ex):
        # M = 2.5 I gives M~ = 6.25 (5I - A)^{-1}, which is not a multiple of I;
        # the formula then yields the ideal P for this A.
        sm = Smoother(ex.m, ex.a)
        np.testing.assert_allclose(p_sharp(sm.m_tilde, ex.d).p, ex.pstar, atol=1e-14)

    def test_theta_zero_at_p_sharp(self, rng, ex):
        assert theta_angle(ex.p, ex.d, 2.5 * np.eye(3))[1] == pytest.approx(0.0, abs=1e-12)
        for _ in range(10):
            a, d, _ = random_case(rng)
            mt = random_smoother(rng, a).m_tilde
            assert theta_angle(p_sharp(mt, d), d, mt)[1] <= 1e-8

    def test_theta_positive_away_from_p_sharp(self, ex):
        sm = Smoother(ex.m, ex.a)
        assert theta_angle(ex.p, ex.d, sm.m_tilde)[1] > 0.1

    def test_theta_two_dimensional_hand_value(self):
        # M~ = I, R = (1, 0): Null(R) = span e2 and Null(P^T) is perpendicular
        # to P = (1, t), so the angle is atan(t).
        d = cf_splitting(2, [0])
        for t in (0.0, 0.3, 1.0, 5.0):
            p = Prolongation(np.array([[1.0], [t]]), d)
            assert theta_angle(p, d, np.eye(2))[0] == pytest.approx(np.arctan(t), abs=1e-12)


class TestSmootherConstants:
    def test_symmetric_smoother(self, spd):
        a = spd(5, cond=10)
        assert smoother_constants(a, Smoother.weighted_jacobi(a, 0.5))[0] == pytest.approx(1.0)

    def test_counter_example(self, ex):
        delta, omega = smoother_constants(ex.a, ex.m)
        assert delta == pytest.approx(1.0)
        assert omega == pytest.approx(4 / 2.5)
        np.testing.assert_allclose(np.linalg.eigvalsh(ex.a), [1, 1, 4], atol=1e-14)

    def test_exact_smoother(self, spd):
        a = spd(4)
        assert smoother_constants(a, a)[1] == pytest.approx(1.0, rel=1e-10)

    def test_nonsymmetric_delta(self, spd):
        a = spd(4, cond=10)
        assert smoother_constants(a, Smoother.gauss_seidel(a))[0] > 1.0

    def test_indefinite_symmetric_part(self):
        a = np.eye(2)
        with pytest.raises(MsNotSpd):
            smoother_constants(a, np.array([[1.0, 3.0], [-3.0, -1.0]]))


class TestSpectralEquivalence:
    def test_scalings(self, spd):
        m = spd(4)
        assert spectral_equiv_constants(m, m) == pytest.approx((1.0, 1.0))
        assert spectral_equiv_constants(2 * m, m) == pytest.approx((0.5, 0.5))

    def test_sampling_bracket(self, spd, rng):
        x, m = spd(5, 10), spd(5, 10)
        c1, c2 = spectral_equiv_constants(x, m)
        e = rng.standard_normal((5, 2000))
        ratio = np.einsum("ij,ik,kj->j", e, m, e) / np.einsum("ij,ik,kj->j", e, x, e)
        assert c1 * (1 - 1e-12) <= ratio.min() and ratio.max() <= c2 * (1 + 1e-12)


def test_measure_report_counter_example(ex):
    rep = measure_report(ex.a, ex.x, ex.d, ex.p, ex.m)
    assert rep.mu_star == pytest.approx(2.0)
    assert rep.worst_case == pytest.approx(2.0)
    assert rep.e_tg_a_norm == pytest.approx(1 - 1 / rep.k_tg)
    assert rep.k >= rep.k_tg


def test_sqrt_helper_consistency(spd):
    a = spd(4)
    h = sqrt_spd(a)
    np.testing.assert_allclose(h @ h, a, rtol=1e-10, atol=1e-10 * np.abs(a).max())
