"""Built-in verification suites.

Each suite is a function ``suite(seed) -> list[CriterionResult]`` running a
fixed battery of randomized or golden checks.  Randomness comes only from
``numpy.random.default_rng(seed)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .coarsening import Decomposition, Prolongation, cf_splitting, general_p
from .ideal import (
    classify,
    epsilon_smoother,
    ideal_p0_direct,
    ideal_p0_via_s,
    range_equiv_p0,
)
from .linalg import SpdMatrix, a_norm, sym_eig
from .measures import (
    Smoother,
    build_ax_bx,
    k_measure,
    k_tg,
    mu_star,
    p_sharp,
    pi_m_tilde,
    smoother_constants,
    theta_angle,
    worst_case_mu,
)
from .twogrid import TgSetup, build_e_tg, solve

__all__ = [
    "CriterionResult", "EXAMPLE_A", "EXAMPLE_X", "EXAMPLE_M", "EXAMPLE_P", "EXAMPLE_PSTAR",
    "example_decomposition", "random_spd", "random_decomposition", "random_smoother",
    "sample_prolongations", "SUITES", "run_suite",
]

EXAMPLE_A = np.array([[2.0, -1.0, 1.0], [-1.0, 2.0, -1.0], [1.0, -1.0, 2.0]])
EXAMPLE_X = np.diag(np.diag(EXAMPLE_A))
EXAMPLE_M = 2.5 * np.eye(3)
EXAMPLE_P = np.array([[0.0], [0.0], [1.0]])
EXAMPLE_PSTAR = np.array([[-1.0 / 3.0], [1.0 / 3.0], [1.0]])


def example_decomposition():
    return cf_splitting(3, [2])


@dataclass
class CriterionResult:
    """Outcome of one check.  ``passed`` depends only on the numerical
    outcome; the wall-clock budget is reported separately by ``within_time``."""

    name: str
    passed: bool
    instances: int = 1
    violations: int = 0
    max_error: float = 0.0
    seconds: float = 0.0
    messages: list = field(default_factory=list)
    time_limit: float = float("inf")
    counts: dict = field(default_factory=dict)

    @property
    def within_time(self):
        return self.seconds < self.time_limit

    def line(self):
        status = "PASS" if self.passed and self.within_time else "FAIL"
        return (f"[{status}] {self.name}: {self.instances} instance(s), "
                f"{self.violations} violation(s), max error {self.max_error:.3e}, "
                f"{self.seconds:.2f}s (limit {self.time_limit:g}s)")


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# -- random instance generators ------------------------------------------------

def random_spd(rng, n, cond=1e3):
    """Random SPD matrix with eigenvalues log-spaced over ``[1, cond]``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.exp(rng.uniform(0.0, np.log(cond), n))
    w[0], w[-1] = 1.0, cond
    a = (q * w) @ q.T
    return 0.5 * (a + a.T)


def random_decomposition(rng, n, n_c=None, kind="cf"):
    """Random C/F splitting (``kind="cf"``) or a general ``(R, S)`` pair.

    The general case uses a Gaussian ``R`` and a non-orthonormal ``S``
    spanning ``Null(R)``.
    """
    if n_c is None:
        n_c = int(rng.integers(1, n))
    if kind == "cf":
        return cf_splitting(n, rng.choice(n, size=n_c, replace=False))
    r = rng.standard_normal((n_c, n))
    _, _, vt = np.linalg.svd(r)
    mix = np.eye(n - n_c) + 0.3 * rng.standard_normal((n - n_c, n - n_c))
    while np.linalg.cond(mix) > 1e2:
        mix = np.eye(n - n_c) + 0.3 * rng.standard_normal((n - n_c, n - n_c))
    return Decomposition(r, vt[n_c:].T @ mix)


def random_smoother(rng, a, kind=None):
    """Random A-convergent smoother (Jacobi, Gauss-Seidel, SOR or nonsymmetric)."""
    a = a.array if isinstance(a, SpdMatrix) else np.asarray(a)
    n = a.shape[0]
    dg = np.diag(np.diag(a))
    low = np.tril(a, -1)
    kinds = ("jacobi", "gauss_seidel", "sor", "nonsymmetric")
    for _ in range(100):
        k = kind or kinds[int(rng.integers(len(kinds)))]
        if k == "jacobi":
            h = 1.0 / np.sqrt(np.diag(a))
            lam = sym_eig(h[:, None] * a * h[None, :]).max
            # weight in (0.2, 0.95) * 2/lam keeps 2M - A positive definite
            m = dg * lam / (2.0 * rng.uniform(0.2, 0.95))
        elif k == "gauss_seidel":
            m = dg + low
        elif k == "sor":
            m = dg / rng.uniform(0.3, 1.8) + low
        else:
            up = np.triu(rng.standard_normal((n, n)), 1)
            m = dg * rng.uniform(0.8, 1.5) + low + 0.3 * np.abs(a).max() * up
        sm = Smoother(m, a)
        if sm.a_convergent:
            return sm
    raise RuntimeError("could not draw an A-convergent smoother")


def _hidden_ideal(rng, a, x, d, pstar, big=False):
    """``P = P* + S Z`` with ``P^T A S`` vanishing on the minimal A_X direction.

    Small ``Z`` keeps ``lambda_min(B_X) = lambda_min(A_X)`` (an ideal P outside
    P0); ``big=True`` usually leaves P1 without reaching P*.
    """
    if d.n_s < 2:
        return None
    ax, _, _ = build_ax_bx(a, x, d, pstar)
    dec = sym_eig(ax)
    sxs = d.s.T @ x @ d.s
    wv, vv = np.linalg.eigh(sxs)
    w = (vv / np.sqrt(wv)) @ vv.T
    y = d.s.T @ a @ d.s @ (w @ dec.vectors[:, 0])
    z = rng.standard_normal((d.n_s, d.n_c))
    z -= np.outer(y, y @ z) / (y @ y)
    z *= np.linalg.norm(pstar.p) / max(np.linalg.norm(d.s @ z), 1e-300)
    if big:
        z *= 3.0
        return Prolongation(pstar.p + d.s @ z, d)
    gap = dec.values[1] - dec.values[0]
    for _ in range(60):
        p = Prolongation(pstar.p + d.s @ z, d)
        _, bx, _ = build_ax_bx(a, x, d, p)
        # C = A_X - B_X is PSD with C v0 = 0; ||C|| < gap keeps v0 minimal.
        if np.linalg.norm(ax - bx, 2) <= 0.5 * gap:
            return p
        z *= 0.5
    return None


def sample_prolongations(rng, a, x, d):
    """Prolongations of several kinds for one instance.

    ``ideal``: the P0 member; ``perturbed``: ideal plus a sizeable ``S``
    component; ``random``: ``general_p`` with Gaussian ``Y``; ``hidden``:
    ideal but outside P0; ``p1``: meets the A_X eigenvector but is generally
    not ideal.  Kinds that cannot be built for the instance are omitted.
    """
    pstar = ideal_p0_direct(a, d)
    out = {"ideal": pstar}
    z = rng.standard_normal((d.n_s, d.n_c))
    z *= 0.1 * np.linalg.norm(pstar.p) / np.linalg.norm(d.s @ z)
    out["perturbed"] = Prolongation(pstar.p + d.s @ z, d)
    out["random"] = general_p(a, d, rng.standard_normal((d.n, d.n_c)))
    hidden = _hidden_ideal(rng, a, x, d, pstar)
    if hidden is not None:
        out["hidden"] = hidden
    p1 = _hidden_ideal(rng, a, x, d, pstar, big=True)
    if p1 is not None:
        out["p1"] = p1
    return out


def _instance(rng, nmin=4, nmax=10, kind=None):
    n = int(rng.integers(nmin, nmax + 1))
    a = random_spd(rng, n)
    k = kind or ("cf" if rng.random() < 0.5 else "general")
    return n, a, random_decomposition(rng, n, kind=k)


# -- suites -------------------------------------------------------------------

def check_counter_example():
    """Golden values for the 3x3 counter-example."""
    out = []
    with _Timer() as t:
        d = example_decomposition()
        a, x = EXAMPLE_A, EXAMPLE_X
        errs = {
            "mu_star": abs(mu_star(a, x, d) - 2.0),
            "worst_case(e3)": abs(worst_case_mu(a, x, d, EXAMPLE_P) - 2.0),
            "P*": float(np.max(np.abs(ideal_p0_direct(a, d).p - EXAMPLE_PSTAR))),
        }
        rep = classify(a, x, d, EXAMPLE_P)
        memberships = (rep.in_p0, rep.in_p1, rep.in_p2, rep.in_pstar)
        tols = {"mu_star": 1e-12, "worst_case(e3)": 1e-10, "P*": 1e-12}
        bad = [k for k, e in errs.items() if e > tols[k]]
        if memberships != (False, True, True, True):
            bad.append(f"memberships {memberships}")
    out.append(CriterionResult("3x3 counter-example golden values", not bad, time_limit=1.0,
                               violations=len(bad), max_error=max(errs.values()),
                               seconds=t.seconds, messages=bad))
    with _Timer() as t:
        sm = Smoother(EXAMPLE_M, EXAMPLE_A)
        msgs, bad = [], 0
        for label, p in (("P = e3", EXAMPLE_P), ("P = P*", EXAMPLE_PSTAR)):
            trace = solve(TgSetup(EXAMPLE_A, sm, p), np.ones(3), reduction=1e-6)
            msgs.append(f"{label}: {trace.iterations} iterations (expected 15)")
            bad += trace.iterations != 15
    out.append(CriterionResult("3x3 counter-example two-grid iteration counts", bad == 0, time_limit=1.0,
                               instances=2, violations=bad, seconds=t.seconds, messages=msgs))
    return out


def check_set_relations(seed=42, instances=200, tol=1e-8):
    """Set relations on random instances.

    ``counts`` tallies membership patterns (``P0``, ``P* not P0``, ``P1 not P*``,
    ``none``) so callers can confirm that every relation was exercised.
    """
    rng = np.random.default_rng(seed)
    violations, kinds, msgs = 0, {}, []
    patterns = {"P0": 0, "P* not P0": 0, "P1 not P*": 0, "none": 0}
    with _Timer() as t:
        for i in range(instances):
            n, a, d = _instance(rng, kind="cf")
            x = random_spd(rng, n, cond=1e2)
            for kind, p in sample_prolongations(rng, a, x, d).items():
                rep = classify(a, x, d, p, tol=tol, strict=False)
                bad = rep.violations()
                key = f"{kind}:{'P*' if rep.in_pstar else 'notP*'}"
                kinds[key] = kinds.get(key, 0) + 1
                if rep.in_p0:
                    patterns["P0"] += 1
                elif rep.in_pstar:
                    patterns["P* not P0"] += 1
                elif rep.in_p1:
                    patterns["P1 not P*"] += 1
                else:
                    patterns["none"] += 1
                if bad:
                    violations += 1
                    msgs.append(f"instance {i} kind {kind}: {bad}")
    msgs.append(f"membership counts {dict(sorted(kinds.items()))}")
    msgs.append(f"membership patterns {patterns}")
    return [CriterionResult("set relations P0 => P* <=> P2 => P1", violations == 0, time_limit=30,
                            instances=instances, violations=violations, seconds=t.seconds,
                            messages=msgs, counts=patterns)]


def check_explicit_ideal(seed=42, instances=200):
    rng = np.random.default_rng(seed)
    violations, worst, msgs = 0, 0.0, []
    with _Timer() as t:
        for i in range(instances):
            n, a, d = _instance(rng)
            direct = ideal_p0_direct(a, d).p
            via_s = ideal_p0_via_s(a, d).p
            scale = np.linalg.norm(direct)
            err = np.linalg.norm(direct - via_s) / scale
            # P0 members solve [S^T A; R] P = [0; I]; full rank of the stacked
            # (square) operator means the solution is unique.
            lhs = np.vstack([d.s.T @ a, d.r])
            rhs = np.vstack([np.zeros((d.n_s, d.n_c)), np.eye(d.n_c)])
            member, _, lhs_rank, _ = np.linalg.lstsq(lhs, rhs, rcond=None)
            u1 = float(lhs_rank != n)
            u2 = np.linalg.norm(member - direct) / scale
            worst = max(worst, err, u2)
            ok = err <= 1e-10 and u1 == 0 and u2 <= 1e-9 and range_equiv_p0(a, d, direct)
            if not ok:
                violations += 1
                msgs.append(f"instance {i}: formula gap {err:.2e}, rank deficient {bool(u1)}, member gap {u2:.2e}")
    return [CriterionResult("explicit ideal P: formula agreement and uniqueness",
                            violations == 0, time_limit=30, instances=instances,
                            violations=violations, max_error=worst, seconds=t.seconds,
                            messages=msgs)]


def check_projection_norms(seed=42, instances=100):
    rng = np.random.default_rng(seed)
    violations, worst, msgs = 0, 0.0, []
    with _Timer() as t:
        for i in range(instances):
            n, a, d = _instance(rng)
            q_star = ideal_p0_direct(a, d).q
            eye = np.eye(n)
            e1 = abs(a_norm(q_star, a) - 1.0)
            e2 = abs(a_norm(eye - q_star, a) - 1.0)
            lo = a_norm(general_p(a, d, rng.standard_normal((n, d.n_c))).q, a)
            worst = max(worst, e1, e2)
            if e1 > 1e-9 or e2 > 1e-9 or lo < 1.0 - 1e-9:
                violations += 1
                msgs.append(f"instance {i}: |Q*|_A-1={e1:.2e}, |I-Q*|_A-1={e2:.2e}, |Q|_A={lo:.6f}")
    return [CriterionResult("energy norms of ideal and general projections",
                            violations == 0, time_limit=10, instances=instances,
                            violations=violations, max_error=worst, seconds=t.seconds,
                            messages=msgs)]


def check_epsilon_smoother(seed=42, instances=100, eps_values=(0.1, 0.25, 1.0)):
    rng = np.random.default_rng(seed)
    violations, msgs, counts = 0, [], {}
    with _Timer() as t:
        for i in range(instances):
            n, a, d = _instance(rng, kind="cf")
            eps = eps_values[i % len(eps_values)]
            x = epsilon_smoother(a, eps).m_s
            for kind, p in sample_prolongations(rng, a, x, d).items():
                rep = classify(a, x, d, p, strict=False)
                counts[kind, rep.in_pstar] = counts.get((kind, rep.in_pstar), 0) + 1
                if rep.in_pstar != rep.in_p0:
                    violations += 1
                    msgs.append(f"instance {i} kind {kind}: P*={rep.in_pstar}, P0={rep.in_p0}")
    msgs.append("membership counts " + str({f"{k}:{v}": c for (k, v), c in sorted(counts.items())}))
    return [CriterionResult("P* = P0 under an epsilon-smoother",
                            violations == 0, time_limit=15, instances=instances,
                            violations=violations, seconds=t.seconds, messages=msgs)]


def _convergent_instance(rng, n=None):
    n = n or int(rng.integers(3, 11))
    a = random_spd(rng, n, cond=1e2)
    d = random_decomposition(rng, n, kind="cf" if rng.random() < 0.5 else "general")
    m = random_smoother(rng, a)
    if rng.random() < 0.3:
        p = ideal_p0_direct(a, d)
    else:
        p = general_p(a, d, rng.standard_normal((n, d.n_c)))
    return a, d, m, p


def check_convergence_identity(seed=42, instances=100):
    rng = np.random.default_rng(seed)
    violations, worst, msgs = 0, 0.0, []
    with _Timer() as t:
        for i in range(instances):
            a, d, m, p = _convergent_instance(rng)
            e_norm = a_norm(build_e_tg(TgSetup(a, m, p)), a)
            ktg = k_tg(a, m, p)
            k = k_measure(a, m, p.q)
            gap = abs(e_norm - (1.0 - 1.0 / ktg))
            worst = max(worst, gap)
            if gap > 1e-8 or e_norm > 1.0 - 1.0 / k + 1e-12 or ktg < 1.0 - 1e-12 or k < ktg * (1 - 1e-12):
                violations += 1
                msgs.append(f"instance {i}: |E|_A={e_norm}, K_TG={ktg}, K={k}")
    return [CriterionResult("convergence identity ||E_TG||_A = 1 - 1/K_TG <= 1 - 1/K",
                            violations == 0, time_limit=20, instances=instances,
                            violations=violations, max_error=worst, seconds=t.seconds,
                            messages=msgs)]


def check_bounds(seed=42, instances=50, samples=1000, slack=1e-12):
    rng = np.random.default_rng(seed)
    violations, msgs = 0, []
    with _Timer() as t:
        for i in range(instances):
            a, d, m, p = _convergent_instance(rng)
            delta, omega = smoother_constants(a, m)
            factor = delta ** 2 / (2.0 - omega)
            mt = m.m_tilde.array
            eye = np.eye(d.n)
            e = rng.standard_normal((samples, d.n))
            res_q = e @ (eye - p.q).T
            res_pi = e @ (eye - pi_m_tilde(p, m.m_tilde)).T
            energy = np.einsum("ij,jk,ik->i", e, a, e)
            mu_mt = np.einsum("ij,jk,ik->i", res_q, mt, res_q) / energy
            mu_ms = np.einsum("ij,jk,ik->i", res_q, m.m_s, res_q) / energy
            nq = np.einsum("ij,jk,ik->i", res_q, mt, res_q)
            npi = np.einsum("ij,jk,ik->i", res_pi, mt, res_pi)
            bad1 = int(np.sum(mu_mt > factor * mu_ms + slack * np.maximum(1.0, factor * mu_ms)))
            bad2 = int(np.sum(npi > nq + slack * np.maximum(1.0, nq)))
            if bad1 or bad2:
                violations += bad1 + bad2
                msgs.append(f"instance {i}: {bad1} smoother-bound and {bad2} projection violations")
    return [CriterionResult("smoother bound and projection inequality",
                            violations == 0, time_limit=20, instances=instances,
                            violations=violations, seconds=t.seconds, messages=msgs)]


def check_angles2d(seed=42, instances=100):
    rng = np.random.default_rng(seed)
    violations, worst, msgs = 0, 0.0, []
    with _Timer() as t:
        for i in range(instances):
            a = random_spd(rng, 2, cond=rng.uniform(1.5, 50.0))
            r = rng.standard_normal((1, 2))
            d = Decomposition(r, rng.uniform(0.5, 2.0) * np.array([[-r[0, 1]], [r[0, 0]]]))
            m = random_smoother(rng, a, kind="nonsymmetric" if i % 2 else None)
            p = general_p(a, d, rng.standard_normal((2, 1)))
            k = k_measure(a, m, p.q)
            ktg = k_tg(a, m, p)
            theta, _ = theta_angle(p, d, m.m_tilde)
            err = abs(k - ktg / np.cos(theta) ** 2) / k
            ps = p_sharp(m.m_tilde, d)
            th_sharp = theta_angle(ps, d, m.m_tilde)[1]
            gap_sharp = abs(k_measure(a, m, ps.q) - k_tg(a, m, ps)) / k_measure(a, m, ps.q)
            worst = max(worst, err)
            if err > 1e-8 or th_sharp > 1e-8 or gap_sharp > 1e-8:
                violations += 1
                msgs.append(f"instance {i}: identity err {err:.2e}, theta(P#) {th_sharp:.2e}, "
                            f"K gap {gap_sharp:.2e}")
    return [CriterionResult("2D angle identity K = K_TG / cos^2 theta",
                            violations == 0, time_limit=5, instances=instances,
                            violations=violations, max_error=worst, seconds=t.seconds,
                            messages=msgs)]


# Suite names are part of the command-line interface.
SUITES = {
    "example21": lambda seed: check_counter_example(),
    "theorem35": lambda seed: check_set_relations(seed),
    "theorem38": lambda seed: check_epsilon_smoother(seed),
    "theorem41": lambda seed: check_explicit_ideal(seed),
    "projection_norms": lambda seed: check_projection_norms(seed),
    "bounds": lambda seed: check_convergence_identity(seed) + check_bounds(seed),
    "angles2d": lambda seed: check_angles2d(seed),
}


def run_suite(name, seed=42):
    if name == "all":
        return [r for key in SUITES for r in SUITES[key](seed)]
    return SUITES[name](seed)
