"""Growth function of a differentiation functional over a node set.

``rho_{q,D}(z, X, mu)`` is the largest value of ``Dp(z)`` over polynomials
``p`` of degree below ``q`` with ``|p(x_j)| <= ||x_j - z||**mu``.  By LP
duality it equals the smallest weighted l1-norm
``sum_j |w_j| ||x_j - z||**mu`` of weights exact on those polynomials.

Both programs are solved with the dense simplex in :mod:`.simplex`; each
solve returns the certificate of the other side through its dual values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentMomentsError
from .geometry import PointSet, stencil_radius
from .kernels import DiffOperator
from .polyspace import PolyBasis, operator_moments, vandermonde
from .simplex import INFEASIBLE, UNBOUNDED, solve_lp
from .stencil import analyze_moments

FINITE = "finite"
INFEASIBLE_DUAL = "infeasible_dual"
UNBOUNDED_PRIMAL = "unbounded_primal"


@dataclass(frozen=True)
class GrowthResult:
    """Growth-function value with both LP certificates when finite.

    ``dual_weights`` are exact weights attaining the value; ``primal_poly``
    are coefficients over ``(x - z)**alpha`` of an extremal polynomial.
    """

    value: float
    status: str
    mu: float
    q: int
    dual_weights: np.ndarray | None = None
    primal_poly: np.ndarray | None = None

    @property
    def finite(self) -> bool:
        return self.status == FINITE

    def to_json(self) -> dict:
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "status": self.status,
            "mu": self.mu,
            "q": self.q,
        }


def _lp_data(ps: PointSet, q: int, D: DiffOperator, mu: float):
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if q < 1:
        raise ValueError("q must be at least 1")
    if D.dim != ps.dim:
        raise ValueError("operator and point set dimensions differ")
    h = stencil_radius(ps) or 1.0
    basis = PolyBasis(ps.dim, q, ps.center, h)
    V = vandermonde(basis, ps)
    b = operator_moments(basis, D) * h**D.order
    cost = (np.linalg.norm(ps.offsets(), axis=1) / h) ** mu
    factor = h ** (mu - D.order)
    degrees = np.array([sum(a) for a in basis.members], dtype=float)
    return V, b, cost, factor, h, degrees


def growth_dual(ps: PointSet, q: int, D: DiffOperator, mu: float) -> GrowthResult:
    """Minimal weighted l1-norm of weights exact on ``Pi_q``."""
    V, b, cost, factor, h, degrees = _lp_data(ps, q, D, mu)
    N = ps.size
    A = np.hstack([V.T, -V.T])
    lp = solve_lp(np.concatenate([cost, cost]), A, b)
    if lp.status == INFEASIBLE:
        return GrowthResult(math.inf, INFEASIBLE_DUAL, mu, q)
    wt = lp.x[:N] - lp.x[N:]
    w = wt / h**D.order
    # duals y of this LP solve the polynomial program: |V y| <= cost, max b.y
    poly = factor * lp.duals * h**D.order / h**degrees
    return GrowthResult(factor * lp.objective, FINITE, mu, q, dual_weights=w, primal_poly=poly)


def growth_primal(ps: PointSet, q: int, D: DiffOperator, mu: float) -> GrowthResult:
    """Largest ``Dp(z)`` over ``p`` in ``Pi_q`` bounded by ``||x_j - z||**mu`` at the nodes."""
    V, b, cost, factor, h, degrees = _lp_data(ps, q, D, mu)
    N, M = V.shape
    A = np.block([[V, -V, np.eye(N), np.zeros((N, N))], [-V, V, np.zeros((N, N)), np.eye(N)]])
    rhs = np.concatenate([cost, cost])
    c = np.concatenate([-b, b, np.zeros(2 * N)])
    lp = solve_lp(c, A, rhs)
    if lp.status == UNBOUNDED:
        return GrowthResult(math.inf, UNBOUNDED_PRIMAL, mu, q)
    chat = lp.x[:M] - lp.x[M:2 * M]
    poly = factor * chat * h**D.order / h**degrees
    y1, y2 = lp.duals[:N], lp.duals[N:]
    w = (y2 - y1) / h**D.order
    return GrowthResult(-factor * lp.objective, FINITE, mu, q, dual_weights=w, primal_poly=poly)


def growth_ls_upper(ps: PointSet, q: int, D: DiffOperator, mu: float) -> float:
    """Weighted l1-norm of the minimum-norm exact weights; never below the LP value."""
    V, b, cost, factor, h, _ = _lp_data(ps, q, D, mu)
    an = analyze_moments(V, b)
    if not an.consistent:
        raise InconsistentMomentsError(
            f"moment equations over polynomials of degree < {q} are inconsistent"
        )
    return float(factor * np.sum(np.abs(an.particular) * cost))
