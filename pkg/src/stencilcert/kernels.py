"""Radial kernels of finite smoothness and their partial derivatives.

Three families are supported:

* polyharmonic splines ``phi(r) = (-1)**ceil(nu/2) * r**nu`` (``nu`` not an
  even integer), conditionally positive definite of order ``ceil(nu/2)``;
* thin plate splines ``phi(r) = (-1)**(n+1) * r**(2n) * log(r)``, of order
  ``n + 1``;
* Wendland's compactly supported functions ``phi_{d,n}`` with unit support,
  strictly positive definite.

Derivatives of ``Phi(x) = phi(||x||)`` are expanded with the operator
``g_{j+1} = (1/r) d/dr g_j`` (``g_0 = phi``), using ``d/dx_i g_j = x_i g_{j+1}``.
Every ``g_j`` is a short sum of terms ``c * r**p * log(r)**l`` with
``l in {0, 1}``, which makes the limits at ``r = 0`` exact: a product of a
monomial of degree ``e`` with ``r**p`` vanishes at the origin iff ``p + e > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import SmoothnessError
from .geometry import MultiIndex

PHS = "phs"
TPS = "tps"
WENDLAND = "wendland"
FAMILIES = (PHS, TPS, WENDLAND)

DEFAULT_TPS_GAMMA = 0.9

# (coef, power, has_log)
GTerm = tuple[float, float, int]


def wendland_profile_coefficients(d: int, n: int) -> np.ndarray:
    """Ascending power coefficients of ``phi_{d,n}`` on ``[0, 1]``.

    Uses the closed forms with ``l = d//2 + n + 1``::

        n = 0:  (1-r)^l
        n = 1:  (1-r)^(l+1) ((l+1) r + 1)
        n = 2:  (1-r)^(l+2) ((l^2+4l+3) r^2 + (3l+6) r + 3)
    """
    if not 1 <= d <= 3:
        raise ValueError("Wendland profiles are provided for 1 <= d <= 3")
    if n not in (0, 1, 2):
        raise ValueError("Wendland profiles are provided for n in {0, 1, 2}")
    ell = d // 2 + n + 1
    if n == 0:
        factor = [1.0]
    elif n == 1:
        factor = [1.0, ell + 1.0]
    else:
        factor = [3.0, 3.0 * ell + 6.0, ell * ell + 4.0 * ell + 3.0]
    base = P.polypow([1.0, -1.0], ell + n)
    return P.polymul(base, factor)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with its parameters and the polynomial order used with it.

    Use the :meth:`phs`, :meth:`tps` and :meth:`wendland` constructors.
    ``s`` is the conditional positive definiteness order used to build the
    stencil; it may exceed the family minimum.
    """

    family: str
    s: int
    nu: float | None = None
    n: int | None = None
    dim_param: int | None = None
    tps_gamma: float = DEFAULT_TPS_GAMMA
    _gcache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == PHS:
            nu = float(self.nu)
            if not nu > 0:
                raise ValueError("polyharmonic exponent must be positive")
            if nu == round(nu) and int(round(nu)) % 2 == 0:
                raise ValueError("polyharmonic exponent must not be an even integer")
            object.__setattr__(self, "nu", nu)
        elif self.family == TPS:
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise ValueError("thin plate spline order n must be a positive integer")
            if not 0 < self.tps_gamma < 1:
                raise ValueError("thin plate spline Hölder exponent must lie in (0, 1)")
        else:
            wendland_profile_coefficients(self.dim_param, self.n)
        if self.s < self.s_min:
            raise ValueError(
                f"order s={self.s} below the minimum {self.s_min} for this kernel"
            )

    # constructors ---------------------------------------------------------
    @classmethod
    def phs(cls, nu: float, s: int | None = None) -> "KernelSpec":
        s_min = math.ceil(float(nu) / 2)
        return cls(PHS, s_min if s is None else s, nu=nu)

    @classmethod
    def tps(cls, n: int, s: int | None = None, gamma: float = DEFAULT_TPS_GAMMA) -> "KernelSpec":
        return cls(TPS, n + 1 if s is None else s, n=n, tps_gamma=gamma)

    @classmethod
    def wendland(cls, d: int, n: int, s: int = 0) -> "KernelSpec":
        return cls(WENDLAND, s, n=n, dim_param=d)

    # metadata -------------------------------------------------------------
    @property
    def s_min(self) -> int:
        if self.family == PHS:
            return math.ceil(self.nu / 2)
        if self.family == TPS:
            return self.n + 1
        return 0

    @property
    def r(self) -> int:
        """Number of continuous derivatives of ``Phi``."""
        if self.family == PHS:
            return math.ceil(self.nu) - 1
        if self.family == TPS:
            return 2 * self.n - 1
        return 2 * self.n

    @property
    def gamma(self) -> float:
        """Hölder exponent of the ``r``-th derivatives."""
        if self.family == PHS:
            return self.nu - self.r
        if self.family == TPS:
            return self.tps_gamma
        return 1.0

    @property
    def sign(self) -> float:
        if self.family == PHS:
            return -1.0 if math.ceil(self.nu / 2) % 2 else 1.0
        if self.family == TPS:
            return -1.0 if self.n % 2 == 0 else 1.0
        return 1.0

    @property
    def compact(self) -> bool:
        return self.family == WENDLAND

    def max_operator_order(self) -> int:
        """Largest operator order ``k`` covered by the family's error bound."""
        if self.family == PHS:
            return math.ceil(self.nu / 2) - 1  # nu > 2k
        if self.family == TPS:
            return self.n - 1
        return self.n

    def describe(self) -> dict:
        out: dict = {"family": self.family, "s": self.s}
        if self.family == PHS:
            out["nu"] = self.nu
        elif self.family == TPS:
            out["n"] = self.n
            out["gamma"] = self.tps_gamma
        else:
            out["d"] = self.dim_param
            out["n"] = self.n
        return out

    # radial profile -------------------------------------------------------
    def g_terms(self, j: int) -> tuple[GTerm, ...]:
        """Terms of ``g_j = ((1/r) d/dr)^j phi`` on the open support."""
        cached = self._gcache.get(j)
        if cached is not None:
            return cached
        if j == 0:
            terms = self._phi_terms()
        else:
            terms = _apply_radial_operator(self.g_terms(j - 1))
        terms = tuple(terms)
        self._gcache[j] = terms
        return terms

    def _phi_terms(self) -> list[GTerm]:
        if self.family == PHS:
            return [(self.sign, self.nu, 0)]
        if self.family == TPS:
            return [(self.sign, 2.0 * self.n, 1)]
        coeffs = wendland_profile_coefficients(self.dim_param, self.n)
        return [(float(c), float(k), 0) for k, c in enumerate(coeffs) if c != 0.0]

    def phi(self, rho) -> np.ndarray:
        """Radial profile ``phi(rho)``."""
        return _eval_g_terms(self, self.g_terms(0), np.asarray(rho, dtype=float))

    # multivariate derivatives --------------------------------------------
    def phi_partial(self, alpha: Sequence[int], diff) -> np.ndarray:
        """``d^alpha Phi`` evaluated at the rows of `diff` (shape ``(..., d)``)."""
        alpha = tuple(int(a) for a in alpha)
        order = sum(alpha)
        if order > self.r:
            raise SmoothnessError(
                f"derivative of order {order} requested, kernel is only C^{self.r}"
            )
        diff = np.asarray(diff, dtype=float)
        if diff.shape[-1] != len(alpha):
            raise ValueError("multi-index length does not match point dimension")
        flat = diff.reshape(-1, diff.shape[-1])
        rho = np.linalg.norm(flat, axis=1)
        out = np.zeros(flat.shape[0])
        pos = rho > 0
        if self.compact:
            pos &= rho < 1.0
        at_zero = rho == 0
        for coef, expo, j in _phi_derivative_terms(alpha):
            mono = np.prod(flat[pos] ** np.asarray(expo, dtype=float), axis=1)
            out[pos] += coef * mono * _eval_g_terms(self, self.g_terms(j), rho[pos], check_support=False)
            if np.any(at_zero):
                out[at_zero] += coef * _limit_at_origin(self.g_terms(j), sum(expo))
        return out.reshape(diff.shape[:-1])


def _apply_radial_operator(terms: Iterable[GTerm]) -> list[GTerm]:
    # (1/r) d/dr [c r^p log(r)^l] = c p r^(p-2) log^l + c l r^(p-2)
    acc: dict[tuple[float, int], float] = {}
    for c, p, l in terms:
        if p != 0:
            acc[(p - 2, l)] = acc.get((p - 2, l), 0.0) + c * p
        if l:
            acc[(p - 2, 0)] = acc.get((p - 2, 0), 0.0) + c
    return [(c, p, l) for (p, l), c in sorted(acc.items()) if c != 0.0]


def _eval_g_terms(kernel: KernelSpec, terms, rho: np.ndarray, check_support: bool = True) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    pos = rho > 0
    if kernel.compact and check_support:
        pos &= rho < 1.0
    rp = rho[pos]
    for c, p, l in terms:
        val = c * rp**p
        if l:
            val = val * np.log(rp)
        out[pos] += val
    zero = rho == 0
    if np.any(zero):
        out[zero] = _limit_at_origin(terms, 0)
    return out


def _limit_at_origin(terms, monomial_degree: int) -> float:
    """Limit at r = 0 of ``x^e * sum(c r^p log^l r)`` with ``|e| = monomial_degree``."""
    total = 0.0
    for c, p, l in terms:
        h = p + monomial_degree
        if h > 0:
            continue
        if h == 0 and l == 0 and monomial_degree == 0:
            total += c
            continue
        raise SmoothnessError("derivative has no limit at coincident points")
    return total


@lru_cache(maxsize=None)
def _phi_derivative_terms(alpha: MultiIndex) -> tuple[tuple[float, MultiIndex, int], ...]:
    """Expand ``d^alpha phi(||x||)`` as ``sum coef * x^expo * g_j(||x||)``."""
    d = len(alpha)
    terms: dict[tuple[MultiIndex, int], float] = {((0,) * d, 0): 1.0}
    for i, times in enumerate(alpha):
        for _ in range(times):
            new: dict[tuple[MultiIndex, int], float] = {}
            for (expo, j), c in terms.items():
                if expo[i] > 0:
                    e2 = expo[:i] + (expo[i] - 1,) + expo[i + 1:]
                    new[(e2, j)] = new.get((e2, j), 0.0) + c * expo[i]
                e3 = expo[:i] + (expo[i] + 1,) + expo[i + 1:]
                new[(e3, j + 1)] = new.get((e3, j + 1), 0.0) + c
            terms = {k: v for k, v in new.items() if v != 0.0}
    return tuple((c, expo, j) for (expo, j), c in sorted(terms.items()))


def smoothness_metadata(kernel: KernelSpec) -> tuple[int, float, int]:
    """``(r, gamma, s_min)``: ``Phi`` is in ``C^{r,gamma}``."""
    return kernel.r, kernel.gamma, kernel.s_min


def radial_profile_derivative(kernel: KernelSpec, j: int, radius: float) -> float:
    """``g_j(radius) = ((1/r) d/dr)^j phi(radius)``.

    At ``radius == 0`` the exact limit is returned when it exists.
    """
    if j < 0:
        raise ValueError("j must be non-negative")
    if 2 * j > kernel.r + 1:
        raise SmoothnessError("derivative order exceeds kernel smoothness")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    return float(_eval_g_terms(kernel, kernel.g_terms(j), np.array([radius]))[0])


def kernel_partial(kernel: KernelSpec, alpha, beta, x, y) -> np.ndarray | float:
    """``d^{alpha,beta} K(x, y) = (-1)^|beta| d^(alpha+beta) Phi(x - y)``.

    `x` and `y` broadcast against each other; a scalar is returned for a
    single pair of points.
    """
    alpha = tuple(alpha)
    beta = tuple(beta)
    if len(alpha) != len(beta):
        raise ValueError("multi-indices of different length")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gamma_ = tuple(a + b for a, b in zip(alpha, beta))
    val = kernel.phi_partial(gamma_, x - y)
    if sum(beta) % 2:
        val = -val
    if np.ndim(val) == 0:
        return float(val)
    return val


def kernel_matrix(kernel: KernelSpec, x, y) -> np.ndarray:
    """``[K(x_i, y_j)]`` for point arrays of shape ``(N, d)`` and ``(M, d)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = x.shape[1]
    return kernel.phi_partial((0,) * d, x[:, None, :] - y[None, :, :])


@dataclass(frozen=True)
class DiffOperator:
    """Linear differential operator ``sum a_alpha d^alpha`` frozen at a point."""

    terms: tuple[tuple[MultiIndex, float], ...]

    def __post_init__(self):
        terms = tuple((tuple(int(a) for a in alpha), float(c)) for alpha, c in self.terms)
        if not terms:
            raise ValueError("operator needs at least one term")
        dims = {len(a) for a, _ in terms}
        if len(dims) != 1:
            raise ValueError("operator terms have inconsistent dimensions")
        if any(min(a) < 0 for a, _ in terms):
            raise ValueError("multi-index entries must be non-negative")
        merged: dict[MultiIndex, float] = {}
        for a, c in terms:
            merged[a] = merged.get(a, 0.0) + c
        terms = tuple((a, c) for a, c in merged.items() if c != 0.0)
        if not terms:
            raise ValueError("operator needs at least one non-zero coefficient")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def identity(cls, d: int) -> "DiffOperator":
        return cls((((0,) * d, 1.0),))

    @classmethod
    def partial(cls, alpha: Sequence[int], coeff: float = 1.0) -> "DiffOperator":
        return cls(((tuple(alpha), coeff),))

    @classmethod
    def laplacian(cls, d: int) -> "DiffOperator":
        return cls(tuple((tuple(2 if i == j else 0 for j in range(d)), 1.0) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.terms[0][0])

    @property
    def order(self) -> int:
        return max(sum(a) for a, _ in self.terms)

    @property
    def homogeneous(self) -> bool:
        k = self.order
        return all(sum(a) == k for a, _ in self.terms)

    def to_json(self) -> list[dict]:
        return [{"alpha": list(a), "coeff": c} for a, c in self.terms]


def operator_apply_kernel(kernel: KernelSpec, D: DiffOperator, z, x) -> np.ndarray | float:
    """``D'K(z, x) = sum a_alpha d^{alpha,0} K(z, x)``; `x` may be ``(N, d)``."""
    z = np.asarray(z, dtype=float)
    zero = (0,) * D.dim
    total = 0.0
    for alpha, c in D.terms:
        total = total + c * np.asarray(kernel_partial(kernel, alpha, zero, z, x))
    if np.ndim(total) == 0:
        return float(total)
    return total


def operator_apply_both(kernel: KernelSpec, D: DiffOperator, z) -> float:
    """``D'D''K(z, z) = sum a_alpha a_beta d^{alpha,beta} K(z, z)``."""
    z = np.asarray(z, dtype=float)
    total = 0.0
    for alpha, ca in D.terms:
        for beta, cb in D.terms:
            total += ca * cb * float(kernel_partial(kernel, alpha, beta, z, z))
    return total


def check_operator_admissible(kernel: KernelSpec, D: DiffOperator) -> None:
    """Raise unless the operator order fits the family (``nu > 2k``, ``n >= k+1``, ``n >= k``)."""
    k = D.order
    if k > kernel.max_operator_order():
        if kernel.family == PHS:
            rule = f"nu > 2k (nu={kernel.nu}, k={k})"
        elif kernel.family == TPS:
            rule = f"n >= k + 1 (n={kernel.n}, k={k})"
        else:
            rule = f"n >= k (n={kernel.n}, k={k})"
        raise SmoothnessError(f"operator order too high for this kernel: need {rule}")
