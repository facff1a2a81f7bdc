"""Hölder constants of kernels and assembly of the growth-function error bound.

For a translation-invariant kernel ``K(x, y) = Phi(x - y)`` with ``Phi`` in
``C^{r,gamma}`` on the ball ``B`` of radius ``diam(S_{z,X})`` about the
origin, the stencil error on the native space is bounded by::

    rho_{q,D}(z, X, (r + gamma)/2) * sqrt(C_{d,r} * |Phi|_{C^{r,gamma}(B)}) * ||f||_K

with ``q = max(s, r//2 + 1)``.  Only exact seminorm values certify this
inequality; sampled values are lower estimates and are labelled as such.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as Pnp
from scipy.stats import qmc

from .accuracy import PowerReport, power_function
from .errors import SmoothnessError
from .geometry import PointSet, indices_of_degree, multinomial, segment_union_diameter
from .growth import GrowthResult, growth_dual
from .kernels import (
    PHS,
    WENDLAND,
    DiffOperator,
    KernelSpec,
    kernel_partial,
    wendland_profile_coefficients,
)
from .stencil import StencilProblem, StencilResult, compute_weights

EXACT = "exact_closed_form"
SAMPLED = "sampled_lower_estimate"
DEFAULT_SAMPLES = 4096
DEFAULT_SEED = 20240917
CERTIFY_RTOL = 1e-8


def cdr_constant(d: int, r: int, gamma: float) -> float:
    """Constant relating the mixed kernel seminorm to the Hölder seminorm of ``Phi``."""
    if r < 0 or not 0 < gamma <= 1:
        raise ValueError("need r >= 0 and 0 < gamma <= 1")
    half = r // 2
    if r % 2 == 0:
        denom = math.prod((gamma / 2 + i) ** 2 for i in range(1, half + 1))
        return 2.0 * d ** (r / 2) / denom
    denom = math.prod(((1 + gamma) / 2 + i) ** 2 for i in range(1, half + 1))
    return d ** (r / 2) / denom


def split_order(r: int, gamma: float) -> tuple[int, float]:
    """Write ``(r + gamma)/2`` as ``m + theta`` with integer ``m`` and ``theta`` in (0, 1]."""
    if r % 2 == 0:
        return r // 2, gamma / 2
    return r // 2, (1 + gamma) / 2


@dataclass(frozen=True)
class HolderEstimate:
    value: float
    mode: str
    r: int
    gamma: float
    radius: float
    samples: int | None = None
    seed: int | None = None

    @property
    def exact(self) -> bool:
        return self.mode == EXACT

    def to_json(self) -> dict:
        out = {"value": self.value, "mode": self.mode, "r": self.r, "gamma": self.gamma, "radius": self.radius}
        if self.mode == SAMPLED:
            out["samples"] = self.samples
            out["seed"] = self.seed
        return out


def _phs_1d_seminorm(kernel: KernelSpec) -> float:
    # d^r/dt^r |t|^nu = c * sgn(t)^r |t|^gamma; the Hölder constant of
    # |t|^gamma is 1 and that of sgn(t)|t|^gamma is 2^(1-gamma)
    r, g = kernel.r, kernel.gamma
    c = abs(math.prod(kernel.nu - i for i in range(r)))
    return c * (1.0 if r % 2 == 0 else 2.0 ** (1.0 - g))


def _wendland_1d_seminorm(kernel: KernelSpec, radius: float) -> float:
    # d^(2n)/dt^(2n) phi(|t|) = phi^(2n)(|t|), piecewise polynomial with a
    # continuous join at 1: the Lipschitz constant is max |phi^(2n+1)|
    coeffs = wendland_profile_coefficients(kernel.dim_param, kernel.n)
    deriv = Pnp.polyder(coeffs, 2 * kernel.n + 1)
    top = min(radius, 1.0)
    cand = [0.0, top]
    crit = Pnp.polyroots(Pnp.polyder(deriv)) if len(deriv) > 1 else []
    cand.extend(float(c.real) for c in np.atleast_1d(crit) if abs(c.imag) < 1e-12 and 0 < c.real < top)
    return float(max(abs(Pnp.polyval(t, deriv)) for t in cand))


def has_exact_seminorm(kernel: KernelSpec, d: int) -> bool:
    return d == 1 and kernel.family in (PHS, WENDLAND)


def phi_holder_seminorm(
    kernel: KernelSpec,
    d: int,
    radius: float,
    mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> HolderEstimate:
    """``|Phi|_{C^{r,gamma}(B)}`` on the origin-centred ball of the given radius.

    ``mode`` is ``"auto"`` (exact when a closed form exists), ``"exact"`` or
    ``"sampled"``.  Closed forms exist for polyharmonic and Wendland kernels
    in one dimension.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if mode not in ("auto", "exact", "sampled"):
        raise ValueError(f"unknown seminorm mode {mode!r}")
    r, g = kernel.r, kernel.gamma
    if mode != "sampled" and has_exact_seminorm(kernel, d):
        if kernel.family == PHS:
            val = _phs_1d_seminorm(kernel)
        else:
            val = _wendland_1d_seminorm(kernel, radius)
        return HolderEstimate(val, EXACT, r, g, radius)
    if mode == "exact":
        raise ValueError(f"no closed-form seminorm for {kernel.family} in dimension {d}")
    val = sampled_holder_seminorm(kernel, d, radius, samples, seed)
    return HolderEstimate(val, SAMPLED, r, g, radius, samples, seed)


def _sobol(dim: int, n: int, seed: int) -> np.ndarray:
    # sample counts need not be powers of two; the balance warning is noise here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(dim, scramble=True, seed=seed).random(n)


def _ball_points(u: np.ndarray, radius: float) -> np.ndarray:
    x = (2.0 * u - 1.0) * radius
    nrm = np.linalg.norm(x, axis=1)
    over = nrm > radius
    x[over] *= (radius / nrm[over])[:, None]
    return x


def sampled_holder_seminorm(kernel: KernelSpec, d: int, radius: float, samples: int, seed: int) -> float:
    """Lower estimate of ``max_|alpha|=r sup |d^alpha Phi(x) - d^alpha Phi(y)| / |x-y|^gamma``."""
    r, g = kernel.r, kernel.gamma
    u = _sobol(2 * d, samples, seed)
    x = _ball_points(u[:, :d], radius)
    y = _ball_points(u[:, d:], radius)
    # pairs through the origin, where the singular behaviour sits
    x = np.vstack([x, x, x])
    y = np.vstack([y, np.zeros_like(y), -x[: samples]])
    dist = np.linalg.norm(x - y, axis=1)
    ok = dist > 0
    best = 0.0
    for alpha in indices_of_degree(d, r):
        fx = kernel.phi_partial(alpha, x[ok])
        fy = kernel.phi_partial(alpha, y[ok])
        best = max(best, float(np.max(np.abs(fx - fy) / dist[ok] ** g)))
    return best


PartialFn = Callable[[tuple, tuple, np.ndarray, np.ndarray], np.ndarray]


def mixed_kernel_seminorm_estimate(
    kernel: KernelSpec | None,
    ps: PointSet,
    m: int,
    gamma: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    partial: PartialFn | None = None,
) -> float:
    """Sampled lower estimate of the mixed seminorm ``|K|_{z,X,m+gamma}``.

    Point pairs are taken on the segments ``[z, x_i] x [z, x_j]``; for each
    pair of multi-indices of order `m` the supremum of the second mixed
    difference quotient is estimated, then the suprema are combined with
    the multinomial weights and the prefactor ``1/prod_i (gamma + i)^2``.

    `partial` replaces ``d^{alpha,beta} K`` (signature ``(alpha, beta, x, y)``
    on point arrays) and allows kernels other than `kernel`.
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if partial is None:
        if kernel is None:
            raise ValueError("need a kernel or a partial-derivative callable")
        if 2 * m > kernel.r:
            raise SmoothnessError(f"kernel derivatives of order {2 * m} are not continuous")

        def partial(alpha, beta, x, y):
            return kernel_partial(kernel, alpha, beta, x, y)

    z = ps.center
    offs = ps.offsets()
    segs = [i for i in range(ps.size) if np.any(offs[i] != 0)]
    if not segs:
        return 0.0
    per_pair = max(1, math.ceil(samples / len(segs) ** 2))
    ts = 1.0 - _sobol(2, per_pair, seed)
    t = np.concatenate([ts[:, 0], ts[:, 0], [1.0]])
    s = np.concatenate([ts[:, 1], ts[:, 0], [1.0]])
    xs, ys = [], []
    for i in segs:
        for j in segs:
            xs.append(z + t[:, None] * offs[i])
            ys.append(z + s[:, None] * offs[j])
    x = np.vstack(xs)
    y = np.vstack(ys)
    zz = np.broadcast_to(z, x.shape)
    denom = (np.linalg.norm(x - z, axis=1) * np.linalg.norm(y - z, axis=1)) ** gamma
    d = ps.dim
    total = 0.0
    for alpha in indices_of_degree(d, m):
        for beta in indices_of_degree(d, m):
            diff = (
                np.asarray(partial(alpha, beta, x, y))
                - np.asarray(partial(alpha, beta, x, zz))
                - np.asarray(partial(alpha, beta, zz, y))
                + np.asarray(partial(alpha, beta, zz, zz))
            )
            sup = float(np.max(np.abs(diff) / denom))
            total += multinomial(alpha) * multinomial(beta) * sup**2
    pref = math.prod((gamma + i) ** 2 for i in range(1, m + 1))
    return math.sqrt(total) / pref


@dataclass(frozen=True)
class BoundReport:
    rho: GrowthResult
    c_dr: float | None
    phi_seminorm: HolderEstimate | None
    rhs: float
    q_used: int
    mu_used: float
    P: float
    certified: bool | None
    variant: str = "holder"
    kernel_seminorm: float | None = None
    power: PowerReport | None = field(default=None, repr=False)
    reduction: str | None = None

    def to_json(self) -> dict:
        out = {
            "variant": self.variant,
            "rho": self.rho.to_json()["value"],
            "rho_status": self.rho.status,
            "c_dr": self.c_dr,
            "phi_seminorm": None if self.phi_seminorm is None else self.phi_seminorm.to_json(),
            "rhs": self.rhs if math.isfinite(self.rhs) else "inf",
            "p": self.P,
            "q": self.q_used,
            "mu": self.mu_used,
            "certified": self.certified,
        }
        if self.kernel_seminorm is not None:
            out["kernel_seminorm"] = self.kernel_seminorm
        if self.reduction is not None:
            out["reduction"] = self.reduction
        return out


def bound_parameters(kernel: KernelSpec, s: int) -> tuple[int, float]:
    """``(q, mu)`` for the Hölder-class bound: ``q = max(s, r//2 + 1)``, ``mu = (r + gamma)/2``."""
    return max(s, kernel.r // 2 + 1), (kernel.r + kernel.gamma) / 2


def _scaled_rhs(rho: float, factor: float) -> float:
    if rho == 0.0:
        return 0.0
    return rho * math.sqrt(factor)


LINE_RTOL = 1e-12


def line_reduction(problem: StencilProblem) -> StencilProblem | None:
    """Equivalent one-dimensional problem for collinear stencils, if any.

    When ``z`` and all nodes lie on a line ``z + t u`` and ``D`` is a
    polynomial in the directional derivative ``u . grad``, kernel values,
    moments, weights, ``P`` and the growth function all coincide with those
    of the problem in the line coordinate ``t``.  Returns ``None`` otherwise.
    """
    ps, D = problem.ps, problem.D
    d = ps.dim
    offs = ps.offsets()
    if d == 1 or not np.any(offs):
        return None
    _, sv, vt = np.linalg.svd(offs, full_matrices=False)
    if sv[1] > LINE_RTOL * sv[0]:
        return None
    u = vt[0]
    t = offs @ u
    if np.max(np.abs(offs - np.outer(t, u))) > LINE_RTOL * sv[0]:
        return None
    coeffs = dict(D.terms)
    terms = []
    for k in sorted({sum(a) for a in coeffs}):
        # (u . grad)^k = sum_{|alpha|=k} multinomial(alpha) u^alpha d^alpha
        basis = {a: multinomial(a) * float(np.prod(u ** np.asarray(a))) for a in indices_of_degree(d, k)}
        lead = max(basis, key=lambda a: abs(basis[a]))
        c = coeffs.get(lead, 0.0) / basis[lead]
        tol = LINE_RTOL * max(abs(c), max(abs(v) for v in coeffs.values()))
        if any(abs(coeffs.get(a, 0.0) - c * b) > tol for a, b in basis.items()):
            return None
        if c != 0.0:
            terms.append(((k,), c))
    if not terms:
        return None
    return StencilProblem(problem.kernel, DiffOperator(tuple(terms)), PointSet([0.0], t[:, None]), problem.s)


def assemble_error_bound(
    problem: StencilProblem,
    seminorm_mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    result: StencilResult | None = None,
    power: PowerReport | None = None,
    radius: float | None = None,
    seminorm: HolderEstimate | None = None,
    q: int | None = None,
    mu: float | None = None,
) -> BoundReport:
    """Growth-function bound on the stencil error with its ingredients.

    `radius` overrides the ball radius ``diam(S_{z,X})`` and `seminorm`
    supplies a precomputed Hölder estimate (used by convergence sweeps that
    keep the ball fixed).  `q` and `mu` override the defaults; the result
    is then only reported, never certified.

    Collinear stencils in ``d > 1`` whose operator differentiates along the
    line are evaluated through :func:`line_reduction`, so that the exact
    one-dimensional seminorm applies; the report is then marked
    ``reduction="line"`` and its growth certificates refer to the line
    coordinate.
    """
    if result is None:
        result = compute_weights(problem)
    if power is None:
        power = power_function(problem, result)
    kernel = problem.kernel
    d = problem.ps.dim
    overridden = q is not None or mu is not None
    if seminorm is None and seminorm_mode == "auto" and not overridden and not has_exact_seminorm(kernel, d):
        line = line_reduction(problem)
        if line is not None and has_exact_seminorm(kernel, 1):
            rep = assemble_error_bound(line, "auto", samples, seed, radius=radius)
            certified = bool(power.p <= rep.rhs * (1.0 + CERTIFY_RTOL))
            return replace(rep, P=power.p, certified=certified, power=power, reduction="line")
    q0, mu0 = bound_parameters(kernel, problem.s)
    q_used = q0 if q is None else int(q)
    mu_used = mu0 if mu is None else float(mu)
    if seminorm is None:
        ball = segment_union_diameter(problem.ps) if radius is None else radius
        if ball == 0.0:
            ball = 1.0
        seminorm = phi_holder_seminorm(kernel, d, ball, seminorm_mode, samples, seed)
    c_dr = cdr_constant(d, kernel.r, kernel.gamma)
    rho = growth_dual(problem.ps, q_used, problem.D, mu_used)
    rhs = _scaled_rhs(rho.value, c_dr * seminorm.value)
    certified = None
    if seminorm.exact and not overridden:
        certified = bool(power.p <= rhs * (1.0 + CERTIFY_RTOL))
    return BoundReport(rho, c_dr, seminorm, rhs, q_used, mu_used, power.p, certified, power=power)


def assemble_integer_order_bound(
    problem: StencilProblem,
    q: int | None = None,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    result: StencilResult | None = None,
    power: PowerReport | None = None,
) -> BoundReport:
    """Older bound ``rho_{q,D}(z,X,q) |K|_{z,X,q}^(1/2)`` for ``max(s, k+1) <= q <= r``.

    The kernel seminorm is sampled, so the report is never certified.
    """
    if result is None:
        result = compute_weights(problem)
    if power is None:
        power = power_function(problem, result)
    kernel = problem.kernel
    lo = max(problem.s, problem.D.order + 1)
    q = lo if q is None else int(q)
    if not lo <= q <= kernel.r:
        raise SmoothnessError(f"integer-order bound needs {lo} <= q <= r={kernel.r}, got q={q}")
    kn = mixed_kernel_seminorm_estimate(kernel, problem.ps, q - 1, 1.0, samples, seed)
    rho = growth_dual(problem.ps, q, problem.D, float(q))
    rhs = _scaled_rhs(rho.value, kn)
    return BoundReport(
        rho, None, None, rhs, q, float(q), power.p, None,
        variant="integer_order", kernel_seminorm=kn, power=power,
    )
