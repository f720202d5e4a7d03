"""Ideal interpolation: set membership and explicit constructions.

Four sets of prolongations are distinguished for fixed ``(A, X, R, S)``:

``P0``
    ``P^T A S = 0``;
``P1``
    ``Null(P^T A S W)`` meets the ``lambda_min`` eigenspace of ``A_X``;
``P2``
    ``Null(P^T A S W)`` meets the ``lambda_min`` eigenspace of ``B_X``;
``P*``
    ``lambda_min(B_X) = lambda_min(A_X)``, i.e. ``P`` attains the optimal
    worst-case measure,

with ``W = (S^T X S)^{-1/2}``.  They satisfy ``P0 <= P2 = P* <= P1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coarsening import (
    Prolongation,
    as_prolongation,
    ideal_projector_complement,
    schur_pieces,
)
from .errors import (
    ConditionCViolated,
    InternalInconsistency,
    NonPositiveEps,
    NotSpd,
    PartitionInvalid,
    SingularAcc,
)
from .linalg import (
    TOL_RANK,
    SpdMatrix,
    as_spd,
    inv_sqrt_spd,
    null_space,
    orth,
    principal_angles,
    rank,
    singular_values,
    sqrt_spd,
    subspace_intersection_dim,
    sym_eig,
)
from .measures import Smoother, build_ax_bx

__all__ = [
    "ClassificationReport", "classify", "ideal_p0_direct", "ideal_p0_via_s",
    "check_rt_ideal", "schur_smoothers", "epsilon_smoother", "range_equiv_p0",
    "range_equiv_tests", "sigma_min_form",
]


@dataclass
class ClassificationReport:
    in_p0: bool
    in_p1: bool
    in_p2: bool
    in_pstar: bool
    lambda_min_ax: float
    lambda_min_bx: float
    eigenspace_dims: dict
    nullspace_dim: int
    intersection_dims: dict
    pas_norm: float
    tolerances: dict = field(default_factory=dict)

    def violations(self):
        """Set relations that this report breaks (empty when consistent)."""
        out = []
        if self.in_p0 and not self.in_pstar:
            out.append("P0 => P*")
        if self.in_pstar != self.in_p2:
            out.append("P* <=> P2")
        if self.in_pstar and not self.in_p1:
            out.append("P* => P1")
        return out


def _eigenspace_min(dec, tol):
    # Cluster: eigenvalues within tol * lambda_max of lambda_min.
    spread = tol * max(abs(dec.values[-1]), np.finfo(float).tiny)
    k = int(np.sum(dec.values - dec.values[0] <= spread))
    return dec.vectors[:, :k]


def classify(a, x, d, p, tol=1e-8, strict=True):
    """Decide membership of ``P`` in ``P0``, ``P1``, ``P2`` and ``P*``.

    ``P*`` is decided by the relative eigenvalue test
    ``|lambda_min(B_X) - lambda_min(A_X)| <= tol * lambda_min(A_X)``.
    ``P0`` uses ``||P^T A S|| <= tol ||A|| ||P|| ||S||``; the null space in
    the ``P1``/``P2`` tests treats singular values below the matching
    absolute threshold (or ``tol * sigma_max``) as zero.  With ``strict``,
    an outcome contradicting the set relations raises
    :class:`InternalInconsistency`.
    """
    a = as_spd(a, "A")
    x = as_spd(x, "X")
    p = as_prolongation(p, d)
    ax, bx, _ = build_ax_bx(a, x, d, p)
    dec_a = sym_eig(ax)
    dec_b = sym_eig(bx)
    lam_a, lam_b = dec_a.min, dec_b.min

    pas = p.p.T @ a.array @ d.s
    pas_norm = float(np.linalg.norm(pas, 2))
    scale = np.linalg.norm(a.array, 2) * np.linalg.norm(p.p, 2) * np.linalg.norm(d.s, 2)
    in_p0 = pas_norm <= tol * scale

    w = inv_sqrt_spd(SpdMatrix(d.s.T @ x.array @ d.s, name="S^T X S"))
    nulls = null_space(pas @ w, tol=tol, atol=tol * scale * np.linalg.norm(w, 2))
    eig_a = _eigenspace_min(dec_a, tol)
    eig_b = _eigenspace_min(dec_b, tol)
    int_a = subspace_intersection_dim(nulls, eig_a, TOL_RANK)
    int_b = subspace_intersection_dim(nulls, eig_b, TOL_RANK)

    rep = ClassificationReport(
        in_p0=bool(in_p0),
        in_p1=int_a > 0,
        in_p2=int_b > 0,
        in_pstar=bool(abs(lam_b - lam_a) <= tol * lam_a),
        lambda_min_ax=lam_a,
        lambda_min_bx=lam_b,
        eigenspace_dims={"A_X": eig_a.shape[1], "B_X": eig_b.shape[1]},
        nullspace_dim=nulls.shape[1],
        intersection_dims={"A_X": int_a, "B_X": int_b},
        pas_norm=pas_norm,
        tolerances={"tol": tol, "rank": TOL_RANK},
    )
    bad = rep.violations()
    if strict and bad:
        raise InternalInconsistency(f"classification breaks {', '.join(bad)}: {rep}")
    return rep


def ideal_p0_direct(a, d):
    """The unique ``P`` with ``P^T A S = 0``: ``A^{-1} R^T (R A^{-1} R^T)^{-1}``.

    Needs only ``A`` and ``R``.
    """
    a = as_spd(a, "A")
    air = a.solve(d.r.T)
    coarse = SpdMatrix(0.5 * (d.r @ air + (d.r @ air).T), name="R A^{-1} R^T")
    return Prolongation(coarse.solve(air.T).T, d)


def ideal_p0_via_s(a, d):
    """Same operator via the complement: ``(I - S (S^T A S)^{-1} S^T A) R^T (RR^T)^{-1}``."""
    return Prolongation(ideal_projector_complement(a, d) @ d.r_pinv, d)


def check_rt_ideal(a, x, d, tol=1e-8):
    """Sufficient test for ``P = R^T`` being ideal.

    Requires ``RR^T = I``.  Holds when ``RAS`` is column-rank deficient and
    ``S^T X S = alpha * K`` with ``K = S^T A S - S^T A R^T (R A R^T)^{-1} R A S``
    and ``alpha > 0``.  Returns ``(holds, alpha)``; ``alpha`` is ``None``
    unless the two matrices are proportional.
    """
    a = as_spd(a, "A")
    x = as_spd(x, "X")
    if np.linalg.norm(d.r @ d.r.T - np.eye(d.n_c), 2) > 1e-10:
        raise ConditionCViolated("RR^T = I", "P = R^T needs orthonormal rows of R")
    ras = d.r @ a.array @ d.s
    rank_deficient = rank(ras, tol) < d.n_s
    sas, _ = schur_pieces(a, d)
    rar = SpdMatrix(d.r @ a.array @ d.r.T, name="R A R^T")
    k = sas.array - ras.T @ rar.solve(ras)
    z = d.s.T @ x.array @ d.s
    alpha = float(np.sum(z * k) / np.sum(k * k))
    resid = np.linalg.norm(z - alpha * k)
    proportional = alpha > 0 and resid <= tol * np.linalg.norm(z)
    return bool(rank_deficient and proportional), (alpha if proportional else None)


def _trailing_blocks(a, n_c):
    a = as_spd(a, "A").array
    n = a.shape[0]
    n_s = n - n_c
    if n_c < 1 or n_s <= n_c:
        raise PartitionInvalid(f"need 1 <= n_c < n_s, got n_c = {n_c}, n_s = {n_s}")
    return a[:n_s, :n_s], a[:n_s, n_s:], a[n_s:, :n_s], a[n_s:, n_s:]


def schur_smoothers(a, n_c, alphas=(2.0, 2.0, 2.0, 2.0)):
    """Four smoothers that make ``P = (0; I)`` ideal for ``X = (M + M^T)/2``.

    The coarse block is the trailing ``n_c`` unknowns.  With
    ``K = A_ff - A_fc A_cc^{-1} A_cf``::

        M1 = [[a1 K, 0], [0,    a1 diag(A_cc)]]
        M2 = [[a2 K, 0], [0,    a2 A_cc      ]]
        M3 = [[a3 K, 0], [A_cf, a3 diag(A_cc)]]
        M4 = [[a4 K, 0], [A_cf, a4 A_cc      ]]

    Each returned :class:`Smoother` carries its ``a_convergent`` flag.
    """
    a = as_spd(a, "A")
    a_ff, a_fc, a_cf, a_cc = _trailing_blocks(a, n_c)
    try:
        acc = SpdMatrix(a_cc, name="A_cc")
    except NotSpd as exc:
        raise SingularAcc(str(exc)) from exc
    schur = a_ff - a_fc @ acc.solve(a_cf)
    schur = 0.5 * (schur + schur.T)
    n_s = a_ff.shape[0]
    zero_fc = np.zeros((n_s, n_c))
    out = []
    for i, alpha in enumerate(alphas):
        coarse = np.diag(np.diag(a_cc)) if i in (0, 2) else a_cc
        lower = a_cf if i >= 2 else np.zeros_like(a_cf)
        m = np.block([[alpha * schur, zero_fc], [lower, alpha * coarse]])
        out.append(Smoother(m, a))
    return out


def epsilon_smoother(a, eps):
    """``M = (1/2 + eps) D + (1 + 2 eps) L`` with ``A = D + L + L^T``.

    Then ``M + M^T - A = 2 eps A`` and ``(M + M^T)/2 = (1/2 + eps) A``.
    """
    if not eps > 0:
        raise NonPositiveEps(f"eps must be positive, got {eps}")
    a = as_spd(a, "A")
    diag = np.diag(np.diag(a.array))
    lower = np.tril(a.array, -1)
    return Smoother((0.5 + eps) * diag + (1 + 2 * eps) * lower, a)


def range_equiv_tests(a, d, p, tol=1e-8):
    """Three independent residual tests for ``P in P0``.

    Returns a dict with ``pas`` (``P^T A S`` residual), ``identity``
    (``R = (P^T A P)^{-1} P^T A``) and ``angle`` (largest principal angle
    between ``Range(AP)`` and ``Range(R^T)``), each as ``(value, passed)``.
    """
    a = as_spd(a, "A")
    p = as_prolongation(p, d)
    ap = a.array @ p.p
    pas = np.linalg.norm(ap.T @ d.s, 2) / (
        np.linalg.norm(a.array, 2) * np.linalg.norm(p.p, 2) * np.linalg.norm(d.s, 2))
    ptap = SpdMatrix(0.5 * (p.p.T @ ap + ap.T @ p.p), name="P^T A P")
    r_fit = ptap.solve(ap.T)
    ident = np.linalg.norm(r_fit - d.r, 2) / max(np.linalg.norm(d.r, 2), np.linalg.norm(r_fit, 2))
    angle = float(principal_angles(orth(ap), orth(d.r.T))[-1])
    return {
        "pas": (float(pas), bool(pas <= tol)),
        "identity": (float(ident), bool(ident <= tol)),
        "angle": (angle, bool(angle <= tol)),
    }


def range_equiv_p0(a, d, p, tol=1e-8):
    """``P^T A S = 0``, ``R = (P^T A P)^{-1} P^T A`` and ``Range(AP) = Range(R^T)``
    are equivalent; all three are checked and must agree.

    Raises :class:`InternalInconsistency` if they do not.
    """
    tests = range_equiv_tests(a, d, p, tol)
    verdicts = {ok for _, ok in tests.values()}
    if len(verdicts) != 1:
        raise InternalInconsistency(f"P0 characterizations disagree: {tests}")
    return verdicts.pop()


def sigma_min_form(a, x, d, p):
    """``(sigma_min(A^{1/2} (I - P (P^T A P)^{-1} P^T A) S W), sigma_min(A^{1/2} S W))``
    with ``W = (S^T X S)^{-1/2}``.  The squares equal ``lambda_min(B_X)`` and
    ``lambda_min(A_X)``."""
    a = as_spd(a, "A")
    x = as_spd(x, "X")
    p = as_prolongation(p, d)
    h = sqrt_spd(a)
    w = inv_sqrt_spd(SpdMatrix(d.s.T @ x.array @ d.s, name="S^T X S"))
    ap = a.array @ p.p
    ptap = SpdMatrix(0.5 * (p.p.T @ ap + ap.T @ p.p), name="P^T A P")
    proj = np.eye(d.n) - p.p @ ptap.solve(ap.T)
    with_p = singular_values(h @ proj @ d.s @ w)[-1]
    without_p = singular_values(h @ d.s @ w)[-1]
    return float(with_p), float(without_p)
