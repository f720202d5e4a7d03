"""Quality measures and two-grid convergence constants.

All suprema over ``e`` are evaluated as extreme eigenvalues of generalized
pencils whose right-hand matrix is SPD (``A`` or ``S^T X S``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .coarsening import Prolongation, as_prolongation, schur_pieces
from .errors import (
    DimensionMismatch,
    InternalInconsistency,
    MsNotSpd,
    NotSpd,
    SingularSmoother,
    SmootherNotAConvergent,
    ZeroVector,
)
from .linalg import (
    SpdMatrix,
    a_norm,
    as_matrix,
    as_spd,
    as_vector,
    gen_eig_spd,
    inv_sqrt_spd,
    null_space,
    principal_angles,
    rank,
    singular_values,
    sqrt_spd,
    sym_eig,
)

__all__ = [
    "Smoother", "MeasureReport", "mu_x", "build_ax_bx", "mu_star", "worst_case_mu",
    "worst_case_mu_full", "k_measure", "k_tg", "pi_m_tilde", "p_sharp", "theta_angle",
    "smoother_constants", "spectral_equiv_constants", "measure_report",
]


def _sym(m):
    return 0.5 * (m + m.T)


class Smoother:
    """Relaxation ``u <- u + M^{-1}(f - A u)`` bound to an SPD ``A``.

    Derived operators are computed eagerly at construction:

    ``m_s``
        symmetric part ``(M + M^T)/2``;
    ``a_convergent``
        whether ``M + M^T - A`` is SPD;
    ``m_tilde``
        the symmetrized smoother ``M^T (M + M^T - A)^{-1} M`` as an
        :class:`SpdMatrix`, or ``None`` when the relaxation is not
        A-convergent.
    """

    def __init__(self, m, a):
        self.a = as_spd(a, "A")
        m = as_matrix(m, "M")
        if m.shape != self.a.shape:
            raise DimensionMismatch(f"M is {m.shape}, A is {self.a.shape}")
        m.setflags(write=False)
        self.m = m
        with warnings.catch_warnings():
            # singularity is reported below from the pivots
            warnings.simplefilter("ignore", LinAlgWarning)
            self._lu = lu_factor(m, check_finite=False)
        piv = np.abs(np.diag(self._lu[0]))
        if piv.size and piv.min() <= 1e-14 * max(piv.max(), np.finfo(float).tiny):
            raise SingularSmoother("smoother matrix M is singular")
        self.m_s = _sym(m)
        try:
            w = SpdMatrix(_sym(m + m.T - self.a.array), name="M + M^T - A")
        except NotSpd:
            w = None
        self.a_convergent = w is not None
        self.m_tilde = None
        if w is not None:
            self.m_tilde = SpdMatrix(_sym(m.T @ w.solve(m)), name="M~")

    @classmethod
    def weighted_jacobi(cls, a, weight=0.8):
        a = as_spd(a, "A")
        return cls(np.diag(np.diag(a.array)) / weight, a)

    @classmethod
    def gauss_seidel(cls, a):
        a = as_spd(a, "A")
        return cls(np.tril(a.array), a)

    @property
    def n(self):
        return self.m.shape[0]

    def solve(self, r, transpose=False):
        """Apply ``M^{-1}`` (or ``M^{-T}``) to ``r``."""
        return lu_solve(self._lu, r, trans=1 if transpose else 0, check_finite=False)

    def require_a_convergent(self):
        if not self.a_convergent:
            raise SmootherNotAConvergent("M + M^T - A is not SPD")
        return self.m_tilde


def _as_smoother(m, a):
    return m if isinstance(m, Smoother) else Smoother(m, a)


@dataclass
class MeasureReport:
    mu_star: float
    worst_case: float
    lambda_min_AX: float
    lambda_min_BX: float
    k: Optional[float] = None
    k_tg: Optional[float] = None
    e_tg_a_norm: Optional[float] = None
    theta: Optional[float] = None
    theta_max: Optional[float] = None
    delta: Optional[float] = None
    omega: Optional[float] = None


def mu_x(a, x, q, e):
    """``(X (I-Q) e, (I-Q) e) / (A e, e)``."""
    a = as_spd(a, "A")
    x = as_matrix(x, "X")
    q = as_matrix(q, "Q")
    e = as_vector(e, a.n, "e")
    if not np.any(e):
        raise ZeroVector("mu_X is undefined for e = 0")
    d = e - q @ e
    return float(d @ x @ d) / float(e @ a.array @ e)


def build_ax_bx(a, x, d, p):
    """Return ``(A_X, B_X, B)``.

    ``A_X = W S^T A S W`` and ``B_X = W S^T B S W`` with
    ``W = (S^T X S)^{-1/2}`` and ``B = A - A P (P^T A P)^{-1} P^T A``.
    """
    a = as_spd(a, "A")
    x = as_spd(x, "X")
    p = as_prolongation(p, d)
    sas, _ = schur_pieces(a, d)
    w = inv_sqrt_spd(SpdMatrix(_sym(d.s.T @ x.array @ d.s), name="S^T X S"))
    ap = a.array @ p.p
    ptap = SpdMatrix(_sym(p.p.T @ ap), name="P^T A P")
    b = _sym(a.array - ap @ ptap.solve(ap.T))
    ax = _sym(w @ sas.array @ w)
    bx = _sym(w @ (d.s.T @ b @ d.s) @ w)
    return ax, bx, b


def mu_star(a, x, d):
    """``1 / lambda_min((S^T X S)^{-1} S^T A S)``, the optimal worst-case measure."""
    x = as_spd(x, "X")
    sas, _ = schur_pieces(a, d)
    sxs = SpdMatrix(_sym(d.s.T @ x.array @ d.s), name="S^T X S")
    return 1.0 / gen_eig_spd(sas.array, sxs).min


def worst_case_mu(a, x, d, p):
    """``max_e mu_X(PR, e) = 1 / lambda_min(B_X)``."""
    _, bx, _ = build_ax_bx(a, x, d, p)
    lam = sym_eig(bx).min
    if lam <= 0:
        raise NotSpd(f"B_X is not positive definite (lambda_min = {lam:.3e})")
    return 1.0 / lam


def worst_case_mu_full(a, x, q):
    """Same supremum computed on the full space:
    ``lambda_max`` of the pencil ``((I-Q)^T X (I-Q), A)``."""
    a = as_spd(a, "A")
    x = as_matrix(x, "X")
    c = np.eye(a.n) - as_matrix(q, "Q")
    return gen_eig_spd(_sym(c.T @ x @ c), a).max


def k_measure(a, m, q):
    """``K = sup_e mu_M~(Q, e)``; needs an A-convergent smoother."""
    a = as_spd(a, "A")
    m_tilde = _as_smoother(m, a).require_a_convergent()
    return worst_case_mu_full(a, m_tilde.array, q)


def pi_m_tilde(p, m_tilde):
    """``P (P^T M~ P)^{-1} P^T M~``, the M~-orthogonal projector onto Range(P)."""
    mt = as_spd(m_tilde, "M~")
    p = p.p if hasattr(p, "p") else as_matrix(p, "P")
    mp = mt.array @ p
    coarse = SpdMatrix(_sym(p.T @ mp), name="P^T M~ P")
    return p @ coarse.solve(mp.T)


def k_tg(a, m, p):
    """``K_TG = sup_e ||(I - Pi) e||^2_M~ / ||e||^2_A`` with ``Pi`` the
    M~-orthogonal projector onto Range(P).

    A square nonsingular ``P`` (exact coarse solve) gives ``E_TG = 0`` and
    returns 1, the value that keeps ``||E_TG||_A = 1 - 1/K_TG``.
    """
    a = as_spd(a, "A")
    m_tilde = _as_smoother(m, a).require_a_convergent()
    pm = p.p if hasattr(p, "p") else as_matrix(p, "P")
    if pm.shape == (a.n, a.n) and rank(pm) == a.n:
        return 1.0
    c = np.eye(a.n) - pi_m_tilde(pm, m_tilde)
    return gen_eig_spd(_sym(c.T @ m_tilde.array @ c), a).max


def p_sharp(m_tilde, d):
    """``M~^{-1} R^T (R M~^{-1} R^T)^{-1}``: the P whose angle with R vanishes."""
    mt = as_spd(m_tilde, "M~")
    if mt.n != d.n:
        raise DimensionMismatch("M~ and decomposition sizes differ")
    mr = mt.solve(d.r.T)
    coarse = SpdMatrix(_sym(d.r @ mr), name="R M~^{-1} R^T")
    return Prolongation(coarse.solve(mr.T).T, d)


def theta_angle(p, d, m_tilde):
    """Principal angles between ``Null(P^T M~^{1/2})`` and ``Null(R M~^{-1/2})``.

    Returns ``(smallest, largest)``.  In two dimensions there is a single
    angle; in general ``P = P_sharp`` iff the *largest* angle is zero.
    """
    mt = as_spd(m_tilde, "M~")
    p = as_prolongation(p, d)
    u = null_space(p.p.T @ sqrt_spd(mt))
    v = null_space(d.r @ inv_sqrt_spd(mt))
    angles = principal_angles(u, v)
    return float(angles[0]), float(angles[-1])


def smoother_constants(a, m):
    """``(Delta, omega)`` for a smoother.

    ``Delta = ||M_s^{-1/2} M M_s^{-1/2}||_2 >= 1`` measures the
    nonsymmetry of ``M``; ``omega = lambda_max(M_s^{-1} A)``.
    """
    a = as_spd(a, "A")
    m = _as_smoother(m, a)
    try:
        ms = SpdMatrix(m.m_s, name="M_s")
    except NotSpd as exc:
        raise MsNotSpd(str(exc)) from exc
    h = inv_sqrt_spd(ms)
    delta = float(singular_values(h @ m.m @ h)[0])
    omega = gen_eig_spd(a.array, ms).max
    if m.a_convergent and not 0.0 < omega < 2.0:
        raise InternalInconsistency(f"A-convergent smoother with omega = {omega}")
    return delta, omega


def spectral_equiv_constants(x, m_tilde):
    """Best ``(c1, c2)`` with ``c1 X <= M~ <= c2 X``."""
    x = as_spd(x, "X")
    mt = as_spd(m_tilde, "M~")
    dec = gen_eig_spd(mt.array, x)
    return dec.min, dec.max


def measure_report(a, x, d, p, m=None):
    """Collect every scalar measure for one ``(A, X, R, S, P[, M])`` instance."""
    from .twogrid import TgSetup, build_e_tg

    a = as_spd(a, "A")
    p = as_prolongation(p, d)
    ax, bx, _ = build_ax_bx(a, x, d, p)
    lam_a = sym_eig(ax).min
    lam_b = sym_eig(bx).min
    rep = MeasureReport(
        mu_star=mu_star(a, x, d),
        worst_case=1.0 / lam_b,
        lambda_min_AX=lam_a,
        lambda_min_BX=lam_b,
    )
    if m is not None:
        m = _as_smoother(m, a)
        try:
            rep.delta, rep.omega = smoother_constants(a, m)
        except MsNotSpd:
            pass
        if m.a_convergent:
            rep.k = k_measure(a, m, p.q)
            rep.k_tg = k_tg(a, m, p)
            rep.e_tg_a_norm = a_norm(build_e_tg(TgSetup(a, m, p)), a)
            rep.theta, rep.theta_max = theta_angle(p, d, m.m_tilde)
    return rep
