"""Dense kernels: Cholesky, symmetric/generalized eigensolvers, null spaces,
principal angles and energy norms.

Matrices are plain ``numpy.ndarray`` objects of dtype float64.  Symmetric
positive definite inputs are wrapped in :class:`SpdMatrix`, which certifies
symmetry and definiteness once and keeps the Cholesky factor around.

Subspaces are represented by ``(n, k)`` arrays with orthonormal columns;
``k`` may be zero.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    EmptySubspace,
    NoConvergence,
    NotSpd,
    NotSymmetric,
)

TOL_SYM = 1e-12
TOL_PIVOT = 1e-13
TOL_ORTH = 1e-10
TOL_RESID = 1e-9
TOL_RANK = 1e-8

__all__ = [
    "TOL_SYM", "TOL_PIVOT", "TOL_ORTH", "TOL_RESID", "TOL_RANK",
    "SpdMatrix", "EigenDecomposition", "as_matrix", "as_vector", "as_spd",
    "cholesky", "sym_eig", "jacobi_eig", "gen_eig_spd", "singular_values",
    "null_space", "orth", "rank", "subspace_intersection_dim", "a_norm",
    "principal_angles", "inv_sqrt_spd", "sqrt_spd", "spd_solve",
]


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array."""
    if isinstance(a, SpdMatrix):
        return a.array
    arr = np.array(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, n=None, name="vector"):
    arr = np.array(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def _symmetry_defect(a):
    return float(np.max(np.abs(a - a.T))) if a.size else 0.0


def _check_symmetric(a, tol_sym, name):
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")
    defect = _symmetry_defect(a)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if defect > tol_sym * scale:
        raise NotSymmetric(
            f"{name} is not symmetric: defect {defect:.3e} > {tol_sym:.1e} * {scale:.3e}")
    return defect


def _cholesky_factor(a, tol_pivot=TOL_PIVOT, name="matrix"):
    # Column-oriented (left-looking) Cholesky.
    n = a.shape[0]
    L = np.zeros_like(a)
    threshold = tol_pivot * (float(np.max(np.diag(a))) if n else 0.0)
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > threshold:
            raise NotSpd(f"{name} is not SPD: pivot {j} = {pivot:.3e}")
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


class SpdMatrix:
    """A symmetric positive definite matrix with its Cholesky factor.

    The stored array is the exactly symmetrized input ``(a + a.T) / 2``.
    Construction raises :class:`NotSymmetric` or :class:`NotSpd`.
    """

    __slots__ = ("array", "chol", "sym_defect", "name")

    def __init__(self, a, name="matrix", tol_sym=TOL_SYM, tol_pivot=TOL_PIVOT):
        arr = as_matrix(a, name)
        self.sym_defect = _check_symmetric(arr, tol_sym, name)
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        self.array = arr
        self.chol = _cholesky_factor(arr, tol_pivot, name)
        self.chol.setflags(write=False)
        self.name = name

    @property
    def n(self):
        return self.array.shape[0]

    @property
    def shape(self):
        return self.array.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.array
        return self.array.astype(dtype)

    def solve(self, b):
        """Solve ``self @ x = b`` with the cached factor."""
        y = solve_triangular(self.chol, b, lower=True)
        return solve_triangular(self.chol.T, y, lower=False)

    def __repr__(self):
        return f"SpdMatrix(n={self.n}, name={self.name!r})"


def as_spd(a, name="matrix"):
    return a if isinstance(a, SpdMatrix) else SpdMatrix(a, name=name)


def spd_solve(a, b):
    return as_spd(a).solve(b)


def cholesky(a, tol_pivot=TOL_PIVOT):
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Raises :class:`NotSpd` if a pivot drops below ``tol_pivot * max(diag(a))``.

    >>> cholesky([[4.0, 2.0], [2.0, 5.0]])
    array([[2., 0.],
           [1., 2.]])
    """
    if isinstance(a, SpdMatrix):
        return a.chol.copy()
    arr = as_matrix(a)
    _check_symmetric(arr, TOL_SYM, "matrix")
    return _cholesky_factor(0.5 * (arr + arr.T), tol_pivot)


class EigenDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def min(self):
        return float(self.values[0])

    @property
    def max(self):
        return float(self.values[-1])


def _off_norm(a):
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eig(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    falls below ``tol * ||a||_F``.  Raises :class:`NoConvergence` after
    ``max_sweeps`` sweeps.
    """
    a = np.array(as_matrix(a), dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if n < 2 or off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-18 * abs(diff):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = diff / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                a[:, p] = c * ap - s * a[:, q]
                a[:, q] = s * ap + c * a[:, q]
                ap = a[p, :].copy()
                a[p, :] = c * ap - s * a[q, :]
                a[q, :] = s * ap + c * a[q, :]
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        off = _off_norm(a)
        if off > tol * scale:
            raise NoConvergence(f"Jacobi: {max_sweeps} sweeps, off-diagonal norm {off:.3e}")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def sym_eig(a, tol_sym=TOL_SYM, method="lapack", check=True):
    """Full spectrum of a symmetric matrix, ascending.

    ``method`` is ``"lapack"`` (default) or ``"jacobi"``.  With ``check``
    every residual ``||a v - lam v||`` is verified against
    ``TOL_RESID * ||a||``.
    """
    arr = as_matrix(a)
    _check_symmetric(arr, tol_sym, "matrix")
    arr = 0.5 * (arr + arr.T)
    if method == "lapack":
        w, v = np.linalg.eigh(arr)
        dec = EigenDecomposition(w, v)
    elif method == "jacobi":
        dec = jacobi_eig(arr)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    if check and arr.size:
        resid = np.linalg.norm(arr @ dec.vectors - dec.vectors * dec.values, axis=0)
        bound = TOL_RESID * max(np.linalg.norm(arr, 2), np.finfo(float).tiny)
        if np.any(resid > bound):
            raise NoConvergence(f"eigen residual {resid.max():.3e} exceeds {bound:.3e}")
    return dec


def gen_eig_spd(a, b, method="lapack"):
    """Generalized eigenpairs of the pencil ``a v = lam b v`` with ``b`` SPD.

    Reduced to a standard problem through the Cholesky factor ``b = L L^T``;
    ``a`` need only be symmetric.  Returned vectors are ``b``-orthonormal.
    """
    b = as_spd(b, "b")
    arr = as_matrix(a, "a")
    if arr.shape != b.shape:
        raise DimensionMismatch(f"pencil shapes differ: {arr.shape} vs {b.shape}")
    _check_symmetric(arr, TOL_SYM, "a")
    L = b.chol
    c = solve_triangular(L, solve_triangular(L, arr, lower=True).T, lower=True)
    c = 0.5 * (c + c.T)
    dec = sym_eig(c, method=method, check=False)
    vectors = solve_triangular(L.T, dec.vectors, lower=False)
    return EigenDecomposition(dec.values, vectors)


def singular_values(m):
    """Singular values in descending order."""
    arr = as_matrix(m)
    if arr.size == 0:
        return np.zeros(0)
    return np.linalg.svd(arr, compute_uv=False)


def rank(m, tol=TOL_RANK, atol=0.0):
    s = singular_values(m)
    if s.size == 0:
        return 0
    return int(np.sum(s > max(tol * s[0], atol)))


def null_space(m, tol=TOL_RANK, atol=0.0):
    """Orthonormal basis of ``{v : ||m v|| <= thr ||v||}``.

    ``thr = max(tol * sigma_max(m), atol)``.  A zero matrix yields the full
    ambient basis, a nonsingular square one an ``(n, 0)`` array.
    """
    arr = as_matrix(m)
    ncols = arr.shape[1]
    if arr.shape[0] == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(arr, full_matrices=True)
    smax = s[0] if s.size else 0.0
    thr = max(tol * smax, atol)
    if smax <= thr:
        return np.eye(ncols)
    r = int(np.sum(s > thr))
    return vt[r:].T.copy()


def orth(m, tol=TOL_RANK):
    """Orthonormal basis of ``Range(m)``."""
    arr = as_matrix(m)
    if arr.size == 0:
        return np.zeros((arr.shape[0], 0))
    u, s, _ = np.linalg.svd(arr, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((arr.shape[0], 0))
    return u[:, : int(np.sum(s > tol * s[0]))].copy()


def subspace_intersection_dim(u, v, tol=TOL_RANK):
    """Dimension of ``span(u) & span(v)`` for orthonormal bases ``u`` and ``v``.

    Computed as ``dim u + dim v - rank([u v])`` with singular values at or
    below ``tol * sigma_max`` treated as zero.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatch(f"ambient dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    k = u.shape[1] + v.shape[1]
    if u.shape[1] == 0 or v.shape[1] == 0:
        return 0
    return k - rank(np.hstack([u, v]), tol)


def principal_angles(u, v):
    """Principal angles (radians, ascending) between two subspaces.

    Cosines come from the singular values of ``u.T @ v``; angles whose
    cosine exceeds ``1/sqrt(2)`` are recomputed from the sines, i.e. the
    singular values of ``v - u (u.T v)``, which keeps small angles accurate.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[0] != v.shape[0]:
        raise DimensionMismatch(f"ambient dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    if u.shape[1] == 0 or v.shape[1] == 0:
        raise EmptySubspace("principal angles need two nonempty subspaces")
    if v.shape[1] > u.shape[1]:
        u, v = v, u
    cos = np.clip(np.linalg.svd(u.T @ v, compute_uv=False), -1.0, 1.0)
    theta = np.arccos(cos)
    sin = np.linalg.svd(v - u @ (u.T @ v), compute_uv=False)
    sin = np.clip(np.sort(sin), 0.0, 1.0)
    small = cos ** 2 > 0.5
    theta[small] = np.arcsin(sin[small])
    return np.sort(theta)


def _spd_power(a, power):
    a = as_spd(a)
    w, v = np.linalg.eigh(a.array)
    out = (v * w ** power) @ v.T
    return 0.5 * (out + out.T)


def inv_sqrt_spd(a):
    """Symmetric ``B`` with ``B a B = I`` (via the eigendecomposition)."""
    return _spd_power(a, -0.5)


def sqrt_spd(a):
    """Symmetric positive square root."""
    return _spd_power(a, 0.5)


def a_norm(e, a):
    """Energy norm ``||E||_A = ||L^T E L^{-T}||_2`` where ``A = L L^T``."""
    a = as_spd(a, "A")
    e = as_matrix(e, "E")
    if e.shape != a.shape:
        raise DimensionMismatch(f"operator shape {e.shape} does not match A {a.shape}")
    L = a.chol
    t = solve_triangular(L, (L.T @ e).T, lower=True).T
    s = singular_values(t)
    return float(s[0]) if s.size else 0.0
