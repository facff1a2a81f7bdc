"""Monomial bases of polynomial spaces, Vandermonde matrices, operator moments.

``Pi_q`` denotes polynomials of total degree at most ``q - 1``; ``Pi_0 = {0}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, prod

import numpy as np

from .geometry import MultiIndex, PointSet, enumerate_multi_indices
from .kernels import DiffOperator


def poly_dim(d: int, q: int) -> int:
    """Dimension of ``Pi_q`` in `d` variables, ``C(d + q - 1, d)``; 0 for ``q == 0``."""
    if d < 1 or q < 0:
        raise ValueError("need d >= 1 and q >= 0")
    return comb(d + q - 1, d) if q > 0 else 0


@dataclass(frozen=True)
class PolyBasis:
    """Monomials ``((x - center) / scale)**alpha`` with ``|alpha| <= q - 1``.

    The default is centered at the evaluation point with unit scale.  A
    different `center` (e.g. the origin) gives the uncentered monomials.
    """

    d: int
    q: int
    center: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.shape[0] != self.d:
            raise ValueError("basis center has the wrong dimension")
        if not self.scale > 0:
            raise ValueError("basis scale must be positive")
        object.__setattr__(self, "center", c)

    @classmethod
    def centered(cls, ps: PointSet, q: int, scale: float = 1.0) -> "PolyBasis":
        return cls(ps.dim, q, ps.center, scale)

    @property
    def members(self) -> list[MultiIndex]:
        return enumerate_multi_indices(self.d, self.q - 1) if self.q > 0 else []

    @property
    def size(self) -> int:
        return poly_dim(self.d, self.q)

    def evaluate(self, x) -> np.ndarray:
        """Basis values at the rows of `x`, shape ``(N, M)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = (x - self.center) / self.scale
        cols = [np.prod(t ** np.asarray(a, dtype=float), axis=1) for a in self.members]
        if not cols:
            return np.zeros((x.shape[0], 0))
        return np.column_stack(cols)


def vandermonde(basis: PolyBasis, ps: PointSet) -> np.ndarray:
    """``V[j, i] = p_i(x_j)``."""
    if basis.d != ps.dim:
        raise ValueError("basis and point set dimensions differ")
    return basis.evaluate(ps.nodes)


def _falling(a: int, b: int) -> int:
    return prod(range(a - b + 1, a + 1))


def monomial_derivative(alpha: MultiIndex, beta: MultiIndex, t: np.ndarray) -> float:
    """``d^beta t^alpha`` evaluated at the (shifted, unscaled) point `t`."""
    if any(b > a for a, b in zip(alpha, beta)):
        return 0.0
    coef = prod(_falling(a, b) for a, b in zip(alpha, beta))
    return float(coef * np.prod(t ** np.subtract(alpha, beta).astype(float)))


def operator_moments(basis: PolyBasis, D: DiffOperator, z=None) -> np.ndarray:
    """``[D p_i](z)`` for every basis member.

    `z` defaults to the basis center; for a centered basis the entry for
    ``alpha`` is ``a_alpha * alpha!`` (scaled by ``scale**-|alpha|``).
    """
    if D.dim != basis.d:
        raise ValueError("operator and basis dimensions differ")
    z = basis.center if z is None else np.asarray(z, dtype=float)
    t = (z - basis.center) / basis.scale
    out = np.zeros(basis.size)
    for i, alpha in enumerate(basis.members):
        total = 0.0
        for beta, c in D.terms:
            total += c * monomial_derivative(alpha, beta, t) / basis.scale ** sum(beta)
        out[i] = total
    return out
