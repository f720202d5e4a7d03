"""Symmetrized two-grid iteration.

One cycle is presmoothing with ``M``, exact Galerkin coarse correction with
``A_c = P^T A P`` and postsmoothing with ``M^T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coarsening import Prolongation
from .errors import DimensionMismatch, ZeroVector
from .linalg import SpdMatrix, as_matrix, as_spd, as_vector
from .measures import Smoother

__all__ = [
    "TgSetup", "SolveTrace", "smoother_step", "tg_cycle", "build_e_tg", "solve",
    "smoother_identity_check",
]


@dataclass(frozen=True, eq=False)
class TgSetup:
    """Matrix, smoother and interpolation with the factored coarse operator.

    ``p`` may be a :class:`Prolongation` or any full-column-rank array; only
    ``P`` enters the cycle.
    """

    a: SpdMatrix
    m: Smoother
    p: np.ndarray
    a_c: SpdMatrix = field(init=False, repr=False)

    def __post_init__(self):
        a = as_spd(self.a, "A")
        m = self.m if isinstance(self.m, Smoother) else Smoother(self.m, a)
        p = self.p.p if isinstance(self.p, Prolongation) else as_matrix(self.p, "P")
        if p.shape[0] != a.n or m.n != a.n:
            raise DimensionMismatch("A, M and P sizes disagree")
        ap = a.array @ p
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a_c", SpdMatrix(0.5 * (p.T @ ap + ap.T @ p), name="A_c"))

    @property
    def n(self):
        return self.a.n


@dataclass
class SolveTrace:
    """History of a two-grid solve.

    ``residual_norms[k]`` is the residual norm after ``k`` cycles, so the
    list has ``iterations + 1`` entries.
    """

    iterations: int
    residual_norms: list
    final_u: np.ndarray
    converged: bool


def smoother_step(m, a, u, f, transpose=False):
    """``u + M^{-1}(f - A u)``, or with ``M^{-T}`` when ``transpose``."""
    a = as_spd(a, "A")
    m = m if isinstance(m, Smoother) else Smoother(m, a)
    u = as_vector(u, a.n, "u")
    f = as_vector(f, a.n, "f")
    return u + m.solve(f - a.array @ u, transpose=transpose)


def tg_cycle(setup, u, f):
    """One pass of presmooth / restrict / coarse solve / prolong / postsmooth."""
    a = setup.a.array
    u = as_vector(u, setup.n, "u")
    f = as_vector(f, setup.n, "f")
    u = u + setup.m.solve(f - a @ u)
    r_c = setup.p.T @ (f - a @ u)
    e_c = setup.a_c.solve(r_c)
    u = u + setup.p @ e_c
    return u + setup.m.solve(f - a @ u, transpose=True)


def build_e_tg(setup):
    """Error propagation ``(I - M^{-T} A)(I - P A_c^{-1} P^T A)(I - M^{-1} A)``."""
    a = setup.a.array
    eye = np.eye(setup.n)
    pre = eye - setup.m.solve(a)
    coarse = eye - setup.p @ setup.a_c.solve(setup.p.T @ a)
    post = eye - setup.m.solve(a, transpose=True)
    return post @ coarse @ pre


_NORMS = {
    "l2": lambda r: float(np.linalg.norm(r)),
    "linf": lambda r: float(np.max(np.abs(r))) if r.size else 0.0,
    "l1": lambda r: float(np.sum(np.abs(r))),
}


def solve(setup, f, u0=None, reduction=1e-6, max_iters=100, baseline="absolute", norm="l2"):
    """Run two-grid cycles until the residual is small enough.

    Stops at the first ``k`` with ``||f - A u_k|| <= reduction * ref`` where
    ``ref`` is 1 for ``baseline="absolute"`` and ``||f - A u_0||`` for
    ``baseline="initial"``.  Hitting ``max_iters`` is not an error: the
    trace comes back with ``converged=False``.
    """
    if not 0.0 < reduction < 1.0:
        raise ValueError("reduction must lie in (0, 1)")
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if baseline not in ("absolute", "initial"):
        raise ValueError(f"unknown baseline {baseline!r}")
    measure = _NORMS[norm]
    a = setup.a.array
    f = as_vector(f, setup.n, "f")
    u = np.zeros(setup.n) if u0 is None else as_vector(u0, setup.n, "u0")
    norms = [measure(f - a @ u)]
    target = reduction * (norms[0] if baseline == "initial" else 1.0)
    k = 0
    while norms[-1] > target and k < max_iters:
        u = tg_cycle(setup, u, f)
        k += 1
        norms.append(measure(f - a @ u))
    return SolveTrace(k, norms, u, norms[-1] <= target)


def smoother_identity_check(a, m, e):
    """Both sides of
    ``||(I - M^{-1}A) e||_A^2 = (Ae, e) - ((M + M^T - A) M^{-1} A e, M^{-1} A e)``."""
    a = as_spd(a, "A")
    m = m if isinstance(m, Smoother) else Smoother(m, a)
    e = as_vector(e, a.n, "e")
    if not np.any(e):
        raise ZeroVector("e must be nonzero")
    ae = a.array @ e
    g = m.solve(ae)
    d = e - g
    lhs = float(d @ a.array @ d)
    w = m.m + m.m.T - a.array
    rhs = float(e @ ae) - float((w @ g) @ g)
    return lhs, rhs
