"""Revised two-phase simplex for small dense LPs.

The basis matrix is refactorized from the original data at every iteration,
so rounding errors do not accumulate across pivots.  This is cheap as long as
the number of equality rows in standard form is modest (a few hundred); the
number of columns may be large.  Pivoting follows Bland's rule (lowest index
entering column, lowest basic index leaving on ratio ties), which rules out
cycling on degenerate vertices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPError", "LPResult", "linprog", "simplex_standard"]

_PIVOT_EPS = 1e-9
_COST_EPS = 1e-10


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    """Solution of an LP.

    ``duals`` holds one multiplier per constraint row (inequality rows first,
    then equality rows) with ``A^T duals <= c`` in standard form, so
    multipliers of ``<=`` rows are nonpositive at an optimum.
    """

    x: np.ndarray | None
    fun: float
    status: str
    iterations: int
    duals: np.ndarray | None = None

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _iterate(A, b, c, basis, allowed, max_iter, rule):
    """Run simplex iterations in place on ``basis``; returns (status, iterations)."""
    m = A.shape[0]
    scale = max(1.0, np.abs(c).max(initial=0.0))
    for it in range(max_iter):
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        pi = np.linalg.solve(B.T, c[basis])
        red = c - A.T @ pi
        red[~allowed] = 0.0
        red[basis] = 0.0
        cand = np.flatnonzero(red < -_COST_EPS * scale)
        if cand.size == 0:
            return "optimal", it
        q = int(cand[0]) if rule == "bland" else int(cand[np.argmin(red[cand])])
        u = np.linalg.solve(B, A[:, q])
        pos = u > _PIVOT_EPS * max(1.0, np.abs(u).max())
        if not pos.any():
            return "unbounded", it
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(xb[pos], 0.0) / u[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
        leave = int(ties[np.argmin(basis[ties])])
        basis[leave] = q
    return "iteration_limit", max_iter


def simplex_standard(c, A, b, rule: str = "bland", max_iter: int = 50_000) -> LPResult:
    """Minimise ``c @ y`` subject to ``A y = b``, ``y >= 0``.

    ``duals`` are the simplex multipliers ``pi`` with ``A^T pi <= c`` at an
    optimum (zero on rows found to be redundant).
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float).reshape(-1, c.size)
    b = np.array(b, dtype=float).reshape(-1)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b = b * sign
    if m == 0:
        if np.any(c < -_COST_EPS):
            return LPResult(None, np.nan, "unbounded", 0)
        return LPResult(np.zeros(n), 0.0, "optimal", 0, np.zeros(0))

    # phase 1 on [A | I] with all artificials basic
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    status, iters = _iterate(A1, b, c1, basis, np.ones(n + m, dtype=bool), max_iter, rule)
    if status != "optimal":
        return LPResult(None, np.nan, status, iters)
    xb = np.linalg.solve(A1[:, basis], b)
    if c1[basis] @ xb > 1e-8 * max(1.0, np.abs(b).max()):
        return LPResult(None, np.nan, "infeasible", iters)

    # pivot zero-level artificials out; rows where that fails are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < n:
            continue
        row = np.linalg.solve(A1[:, basis].T, np.eye(m)[r])
        alpha = row @ A
        alpha[basis[basis < n]] = 0.0
        cand = np.flatnonzero(np.abs(alpha) > 1e-7)
        if cand.size:
            basis[r] = int(cand[0])
        else:
            keep[r] = False
    rows = np.flatnonzero(keep)
    A2, b2, basis2 = A[rows], b[rows], basis[rows]
    status, it2 = _iterate(A2, b2, c, basis2, np.ones(n, dtype=bool), max_iter - iters, rule)
    iters += it2
    if status != "optimal":
        return LPResult(None, np.nan, status, iters)
    B = A2[:, basis2]
    y = np.zeros(n)
    y[basis2] = np.maximum(np.linalg.solve(B, b2), 0.0)
    pi = np.zeros(m)
    pi[rows] = np.linalg.solve(B.T, c[basis2])
    return LPResult(y, float(c @ y), "optimal", iters, pi * sign)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=None,
            rule: str = "bland", max_iter: int = 50_000) -> LPResult:
    """Minimise ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative unless flagged in the boolean mask ``free``;
    free variables are split into positive and negative parts internally.

    Parameters
    ----------
    rule : {"bland", "dantzig"}
        Entering-column rule.  ``"dantzig"`` (most negative reduced cost)
        usually needs fewer iterations but may cycle on degenerate problems.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    free = np.zeros(n, dtype=bool) if free is None else np.asarray(free, dtype=bool)

    fidx = np.flatnonzero(free)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    A = np.vstack([A_ub, A_eq])
    slack = np.vstack([np.eye(m_ub), np.zeros((m_eq, m_ub))])
    A_std = np.hstack([A, -A[:, fidx], slack])
    c_std = np.concatenate([c, -c[fidx], np.zeros(m_ub)])
    res = simplex_standard(c_std, A_std, np.concatenate([b_ub, b_eq]), rule, max_iter)
    if not res.success:
        return LPResult(None, np.nan, res.status, res.iterations)
    x = res.x[:n].copy()
    x[fidx] -= res.x[n:n + fidx.size]
    return LPResult(x, float(c @ x), "optimal", res.iterations, res.duals)
