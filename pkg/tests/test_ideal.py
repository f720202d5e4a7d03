import numpy as np
import pytest

from ideal_amg.coarsening import Prolongation, cf_splitting, decomposition_from_r, general_p
from ideal_amg.errors import (
    ConditionCViolated,
    NonPositiveEps,
    NotSpd,
    PartitionInvalid,
)
from ideal_amg.ideal import (
    check_rt_ideal,
    classify,
    epsilon_smoother,
    ideal_p0_direct,
    ideal_p0_via_s,
    range_equiv_p0,
    range_equiv_tests,
    schur_smoothers,
    sigma_min_form,
)
from ideal_amg.measures import build_ax_bx, smoother_constants
from ideal_amg.suites import random_decomposition, random_spd, sample_prolongations


def laplacian(n):
    return 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


class TestClassify:
    def test_counter_example_p(self, ex):
        rep = classify(ex.a, ex.x, ex.d, ex.p)
        assert (rep.in_p0, rep.in_p1, rep.in_p2, rep.in_pstar) == (False, True, True, True)
        assert rep.lambda_min_ax == pytest.approx(0.5)
        assert rep.lambda_min_bx == pytest.approx(0.5)

    def test_counter_example_ideal(self, ex):
        rep = classify(ex.a, ex.x, ex.d, ex.pstar)
        assert (rep.in_p0, rep.in_p1, rep.in_p2, rep.in_pstar) == (True, True, True, True)

    def test_counter_example_symmetric_part_weight(self, ex):
        # X = (M + M^T)/2 = 2.5 I is scalar, so P = e3 stays ideal outside P0
        rep = classify(ex.a, 0.5 * (ex.m + ex.m.T), ex.d, ex.p)
        assert (rep.in_p0, rep.in_pstar) == (False, True)

    def test_counter_example_not_ideal(self, ex):
        p = np.array([[1.0], [0.0], [1.0]])
        rep = classify(ex.a, ex.x, ex.d, p)
        _, bx, _ = build_ax_bx(ex.a, ex.x, ex.d, p)
        assert np.linalg.eigvalsh(bx)[0] < 0.5 - 1e-3
        assert not rep.in_pstar and not rep.in_p0
        assert rep.violations() == []

    def test_monotone_in_tolerance(self, rng):
        tols = [1e-12, 1e-10, 1e-8, 1e-6, 1e-4]
        for _ in range(15):
            n = int(rng.integers(4, 9))
            a, x = random_spd(rng, n), random_spd(rng, n, 1e2)
            d = random_decomposition(rng, n)
            for p in sample_prolongations(rng, a, x, d).values():
                prev = None
                for tol in tols:
                    rep = classify(a, x, d, p, tol=tol, strict=False)
                    cur = (rep.in_p0, rep.in_p1, rep.in_p2, rep.in_pstar)
                    if prev is not None:
                        assert all(c or not p_ for p_, c in zip(prev, cur))
                    prev = cur


class TestExplicitIdeal:
    def test_counter_example(self, ex):
        np.testing.assert_allclose(ideal_p0_direct(ex.a, ex.d).p, ex.pstar, atol=1e-12)
        np.testing.assert_allclose(ideal_p0_via_s(ex.a, ex.d).p, ex.pstar, atol=1e-12)

    def test_identity_matrix(self, rng):
        r = np.linalg.qr(rng.standard_normal((6, 2)))[0].T
        d = decomposition_from_r(r)
        np.testing.assert_allclose(ideal_p0_direct(np.eye(6), d).p, r.T, atol=1e-12)

    def test_orthonormal_r_form(self, rng):
        r = np.linalg.qr(rng.standard_normal((6, 2)))[0].T
        d = decomposition_from_r(r)
        a = random_spd(rng, 6)
        s = d.s
        ref = r.T - s @ np.linalg.solve(s.T @ a @ s, s.T @ a @ r.T)
        np.testing.assert_allclose(ideal_p0_via_s(a, d).p, ref, atol=1e-10)

    def test_random_agreement(self, rng):
        for _ in range(20):
            n = int(rng.integers(4, 11))
            a = random_spd(rng, n)
            d = random_decomposition(rng, n, kind="general")
            direct = ideal_p0_direct(a, d)
            scale = np.linalg.norm(direct.p)
            assert np.linalg.norm(direct.p.T @ a @ d.s) <= 1e-10 * np.linalg.norm(a) * scale
            assert np.linalg.norm(direct.p - ideal_p0_via_s(a, d).p) <= 1e-10 * scale
            assert np.linalg.norm(direct.p - general_p(a, d, -d.r_pinv).p) <= 1e-10 * scale
            q = direct.q
            assert np.linalg.norm(a @ q - q.T @ a) <= 1e-10 * np.linalg.norm(a)


class TestRtIdeal:
    def test_block_construction(self, rng):
        n_s, n_c = 4, 2
        a = random_spd(rng, n_s + n_c, 50)
        d = cf_splitting(n_s + n_c, range(n_s, n_s + n_c))
        a_ff, a_fc, a_cc = a[:n_s, :n_s], a[:n_s, n_s:], a[n_s:, n_s:]
        schur = a_ff - a_fc @ np.linalg.solve(a_cc, a_fc.T)
        x = np.zeros_like(a)
        x[:n_s, :n_s] = 3.0 * schur
        x[n_s:, n_s:] = np.eye(n_c)
        holds, alpha = check_rt_ideal(a, x, d)
        assert holds
        assert alpha == pytest.approx(3.0, rel=1e-10)
        assert classify(a, x, d, d.r.T).in_pstar

    def test_counter_example(self, ex):
        assert check_rt_ideal(ex.a, ex.x, ex.d) == (False, None)

    def test_rank_condition(self, rng):
        a = random_spd(rng, 5)
        d = cf_splitting(5, [2, 3, 4])
        holds, _ = check_rt_ideal(a, a, d)
        assert not holds

    def test_requires_orthonormal_rows(self, ex):
        d = decomposition_from_r(np.array([[1.0, 1.0, 0.0]]))
        with pytest.raises(ConditionCViolated):
            check_rt_ideal(ex.a, ex.x, d)


class TestSpecialSmoothers:
    def test_schur_flags(self):
        a = laplacian(5)
        sms = schur_smoothers(a, 2)
        assert len(sms) == 4
        for sm in sms:
            lam = np.linalg.eigvalsh(sm.m + sm.m.T - a)[0]
            assert sm.a_convergent == (lam > 0)
        for sm in sms[:2]:
            assert smoother_constants(a, sm)[0] == pytest.approx(1.0)

    def test_schur_makes_rt_ideal(self):
        a = laplacian(5)
        d = cf_splitting(5, [3, 4])
        for sm in schur_smoothers(a, 2, alphas=(4.0, 4.0, 4.0, 4.0)):
            assert classify(a, sm.m_s, d, d.r.T).in_pstar

    def test_schur_partition_errors(self):
        with pytest.raises(PartitionInvalid):
            schur_smoothers(laplacian(4), 2)
        a = np.eye(5)
        a[4, 4] = 0.0
        # A_cc is a principal block, so it can only be singular when A is.
        with pytest.raises(NotSpd):
            schur_smoothers(a, 1)

    def test_epsilon_smoother(self, ex, rng):
        sm = epsilon_smoother(ex.a, 0.25)
        np.testing.assert_allclose(sm.m + sm.m.T - ex.a, 0.5 * ex.a, atol=1e-15)
        a = random_spd(rng, 6)
        for eps in (0.1, 1.0):
            sm = epsilon_smoother(a, eps)
            np.testing.assert_allclose(sm.m_s, (0.5 + eps) * a, atol=1e-12 * np.abs(a).max())
            assert sm.a_convergent
        with pytest.raises(NonPositiveEps):
            epsilon_smoother(ex.a, 0.0)


class TestRangeEquivalence:
    def test_examples(self, ex, rng):
        assert range_equiv_p0(ex.a, ex.d, ex.pstar)
        assert not range_equiv_p0(ex.a, ex.d, ex.p)
        for _ in range(10):
            n = int(rng.integers(4, 9))
            a = random_spd(rng, n)
            d = random_decomposition(rng, n, kind="general")
            assert range_equiv_p0(a, d, ideal_p0_direct(a, d))
            p = general_p(a, d, rng.standard_normal((n, d.n_c)))
            tests = range_equiv_tests(a, d, p)
            assert not any(ok for _, ok in tests.values())


class TestSigmaForm:
    def test_counter_example(self, ex):
        with_p, without_p = sigma_min_form(ex.a, ex.x, ex.d, ex.p)
        assert with_p ** 2 == pytest.approx(0.5)
        assert without_p ** 2 == pytest.approx(0.5)

    def test_ideal_and_non_ideal(self, rng):
        n = 6
        a, x = random_spd(rng, n), random_spd(rng, n, 10)
        d = random_decomposition(rng, n, 2)
        w, wo = sigma_min_form(a, x, d, ideal_p0_direct(a, d))
        assert w == pytest.approx(wo, rel=1e-10)
        p = general_p(a, d, rng.standard_normal((n, 2)))
        w, wo = sigma_min_form(a, x, d, p)
        assert w < wo
        ax, bx, _ = build_ax_bx(a, x, d, p)
        assert w ** 2 == pytest.approx(np.linalg.eigvalsh(bx)[0], rel=1e-8)
        assert wo ** 2 == pytest.approx(np.linalg.eigvalsh(ax)[0], rel=1e-8)


def test_prolongation_validation_in_classify(ex):
    with pytest.raises(ConditionCViolated):
        classify(ex.a, ex.x, ex.d, Prolongation(ex.p, ex.d).p * 2)
