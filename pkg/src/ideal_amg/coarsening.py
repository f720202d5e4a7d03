"""The (R, S, P) structure behind two-grid analysis.

A :class:`Decomposition` holds a restriction ``R`` (``n_c x n``) and an
auxiliary complement ``S`` (``n x n_s``) with ``RS = 0`` and ``S`` of full
column rank.  A :class:`Prolongation` is a full-column-rank ``P`` bound to a
decomposition with ``RP = I``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoarseSetIsAll, ConditionCViolated, DimensionMismatch, EmptyCoarseSet, NotSpd
from .linalg import TOL_ORTH, TOL_RANK, SpdMatrix, as_matrix, as_spd, singular_values

__all__ = [
    "Decomposition", "Prolongation", "cf_splitting", "decomposition_from_r",
    "as_prolongation", "schur_pieces", "block_inverse_sp", "block_inverse_sr",
    "general_p", "ideal_projector_complement",
]


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Restriction ``r`` and complement ``s`` satisfying ``r @ s = 0``.

    Validation happens at construction; ``RR^T`` is factored once and kept.
    """

    r: np.ndarray
    s: np.ndarray
    rrt: SpdMatrix = field(init=False, repr=False)

    def __post_init__(self):
        r = as_matrix(self.r, "R")
        s = as_matrix(self.s, "S")
        n_c, n = r.shape
        if s.shape[0] != n:
            raise DimensionMismatch(f"S has {s.shape[0]} rows, R has {n} columns")
        if n_c < 1:
            raise EmptyCoarseSet("R has no rows")
        if s.shape[1] != n - n_c:
            if n_c >= n:
                raise CoarseSetIsAll("n_c = n leaves no room for S")
            raise DimensionMismatch(f"S must have n - n_c = {n - n_c} columns, got {s.shape[1]}")
        scale = max(np.linalg.norm(r, 2) * np.linalg.norm(s, 2), np.finfo(float).tiny)
        if np.linalg.norm(r @ s, 2) > TOL_ORTH * scale:
            raise ConditionCViolated("RS = 0", f"||RS|| = {np.linalg.norm(r @ s, 2):.3e}")
        sv = singular_values(s)
        if sv[-1] <= TOL_RANK * sv[0]:
            raise ConditionCViolated("S full column rank")
        try:
            rrt = SpdMatrix(r @ r.T, name="RR^T")
        except NotSpd as exc:
            raise ConditionCViolated("R full row rank") from exc
        sv = singular_values(np.hstack([s, r.T]))
        if sv[-1] <= TOL_RANK * sv[0]:
            raise ConditionCViolated("(S R^T) nonsingular")
        r.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "rrt", rrt)

    @property
    def n(self):
        return self.r.shape[1]

    @property
    def n_c(self):
        return self.r.shape[0]

    @property
    def n_s(self):
        return self.s.shape[1]

    @property
    def r_pinv(self):
        """``R^T (R R^T)^{-1}``, the least-squares right inverse of ``R``."""
        return self.rrt.solve(self.r).T


@dataclass(frozen=True, eq=False)
class Prolongation:
    """Interpolation ``p`` (``n x n_c``) with ``R P = I`` for its decomposition."""

    p: np.ndarray
    decomposition: Decomposition

    def __post_init__(self):
        d = self.decomposition
        p = as_matrix(self.p, "P")
        if p.shape != (d.n, d.n_c):
            raise DimensionMismatch(f"P must be {(d.n, d.n_c)}, got {p.shape}")
        defect = np.linalg.norm(d.r @ p - np.eye(d.n_c), 2)
        scale = max(1.0, np.linalg.norm(d.r, 2) * np.linalg.norm(p, 2))
        if defect > TOL_ORTH * scale:
            raise ConditionCViolated("RP = I", f"||RP - I|| = {defect:.3e}")
        sv = singular_values(p)
        if sv[-1] <= TOL_RANK * sv[0]:
            raise ConditionCViolated("P full column rank")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def q(self):
        """The projection ``Q = P R``."""
        return self.p @ self.decomposition.r


def as_prolongation(p, d=None):
    if isinstance(p, Prolongation):
        if d is not None and p.decomposition is not d:
            return Prolongation(p.p, d)
        return p
    if d is None:
        raise TypeError("a raw P array needs a Decomposition")
    return Prolongation(p, d)


def cf_splitting(n, coarse_indices):
    """C/F decomposition with ``R`` selecting the coarse rows (0-based).

    ``S`` embeds the remaining (fine-only) coordinates in ascending order.

    >>> d = cf_splitting(3, [2])
    >>> d.r
    array([[0., 0., 1.]])
    """
    coarse = sorted({int(i) for i in coarse_indices})
    if not coarse:
        raise EmptyCoarseSet("coarse set is empty")
    if coarse[0] < 0 or coarse[-1] >= n:
        raise DimensionMismatch(f"coarse indices must lie in [0, {n})")
    if len(coarse) == n:
        raise CoarseSetIsAll("every point is coarse; S would be empty")
    cset = set(coarse)
    fine = [i for i in range(n) if i not in cset]
    eye = np.eye(n)
    return Decomposition(eye[coarse], eye[:, fine])


def decomposition_from_r(r, s=None):
    """Build a decomposition from ``R``; ``S`` defaults to an orthonormal
    basis of ``Null(R)``."""
    r = as_matrix(r, "R")
    if s is None:
        _, sv, vt = np.linalg.svd(r, full_matrices=True)
        s = vt[r.shape[0]:].T
    return Decomposition(r, s)


def schur_pieces(a, d):
    """Return ``(S^T A S, S^T A)`` with the former certified SPD."""
    a = as_spd(a, "A")
    if a.n != d.n:
        raise DimensionMismatch(f"A is {a.n}x{a.n} but decomposition has n = {d.n}")
    sta = d.s.T @ a.array
    return SpdMatrix(sta @ d.s, name="S^T A S"), sta


def ideal_projector_complement(a, d):
    """``I - S (S^T A S)^{-1} S^T A``."""
    sas, sta = schur_pieces(a, d)
    return np.eye(d.n) - d.s @ sas.solve(sta)


def block_inverse_sp(a, d, p):
    """Inverse of ``(S P)`` as the stacked rows ``[(S^T A S)^{-1} S^T A (I - Q); R]``."""
    p = as_prolongation(p, d)
    sas, sta = schur_pieces(a, d)
    top = sas.solve(sta @ (np.eye(d.n) - p.q))
    return np.vstack([top, d.r])


def block_inverse_sr(a, d):
    """Inverse of ``(S R^T)`` as
    ``[(S^T A S)^{-1} S^T A (I - R^T (RR^T)^{-1} R); (RR^T)^{-1} R]``."""
    sas, sta = schur_pieces(a, d)
    r_pinv = d.r_pinv
    top = sas.solve(sta @ (np.eye(d.n) - r_pinv @ d.r))
    return np.vstack([top, r_pinv.T])


def general_p(a, d, y):
    """``P = R^T (RR^T)^{-1} + S (S^T A S)^{-1} S^T A Y``.

    Every ``P`` with ``RP = I`` has this form for some ``Y`` (``n x n_c``).
    ``y = 0`` gives the least-squares right inverse of ``R``.
    """
    y = as_matrix(y, "Y")
    if y.shape != (d.n, d.n_c):
        raise DimensionMismatch(f"Y must be {(d.n, d.n_c)}, got {y.shape}")
    sas, sta = schur_pieces(a, d)
    return Prolongation(d.r_pinv + d.s @ sas.solve(sta @ y), d)
