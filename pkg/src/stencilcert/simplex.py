"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A @ x == b`` and ``x >= 0``.  Intended
for the small, dense problems of the growth-function computation; no
attempt is made at sparsity or speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-11
COST_TOL = 1e-10
FEAS_RTOL = 1e-9


class SimplexIterationLimit(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    iterations: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _run(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> tuple[str, int]:
    """Iterate on tableau `T` (last row = reduced costs, last column = rhs)."""
    m = T.shape[0] - 1
    for it in range(max_iter):
        cost = T[-1, :ncols]
        entering = np.flatnonzero(cost < -COST_TOL)
        if entering.size == 0:
            return OPTIMAL, it
        col = int(entering[0])
        colv = T[:m, col]
        rows = np.flatnonzero(colv > PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
    raise SimplexIterationLimit(f"no convergence after {max_iter} pivots")


def solve_lp(c, A, b, max_iter: int = 100_000) -> LPResult:
    """Minimise ``c @ x`` over ``{x >= 0 : A x = b}``.

    Returns an :class:`LPResult` whose ``duals`` satisfy
    ``A.T @ duals <= c`` at optimality, with equal objective values.
    """
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float, ndmin=2)
    b = np.asarray(b, dtype=float).copy()
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    # phase 1: artificial identity block, minimise their sum
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, it1 = _run(T, basis, n + m, max_iter)
    if -T[-1, -1] > FEAS_RTOL * (1.0 + np.abs(b).sum()):
        return LPResult(INFEASIBLE, iterations=it1)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            cand = np.flatnonzero(np.abs(T[i, :n]) > PIVOT_TOL * max(1.0, np.abs(T[i, :n]).max()))
            if cand.size:
                _pivot(T, i, int(cand[0]))
                basis[i] = int(cand[0])
                keep.append(i)
        else:
            keep.append(i)
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis2 = [basis[i] for i in keep]
    # phase 2 reduced costs
    T2[-1, :n] = c
    for r, j in enumerate(basis2):
        if T2[-1, j] != 0.0:
            T2[-1] -= T2[-1, j] * T2[r]
    status, it2 = _run(T2, basis2, n, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=it1 + it2)

    # recompute the basic solution and duals from the original data
    rows = np.array(keep, dtype=int)
    B = A[np.ix_(rows, basis2)]
    x = np.zeros(n)
    if len(basis2):
        x[basis2] = np.linalg.solve(B, b[rows])
        y_kept = np.linalg.solve(B.T, c[basis2])
    else:
        y_kept = np.zeros(0)
    x = np.maximum(x, 0.0)
    y = np.zeros(m)
    y[rows] = y_kept
    y *= sign
    return LPResult(OPTIMAL, x=x, objective=float(c @ x), duals=y, iterations=it1 + it2)
