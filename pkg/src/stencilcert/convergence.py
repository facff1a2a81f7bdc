"""Convergence sweeps: stencil error, power function and bound under dilation.

The node set is dilated about the center, ``X_h = z + h (X - z)``, and each
level is solved independently.  The Hölder seminorm is computed once on the
ball of the coarsest level and reused, so the bound scales exactly like the
growth function.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .accuracy import power_function, quadratic_form_scale
from .bounds import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    assemble_error_bound,
    bound_parameters,
    phi_holder_seminorm,
)
from .geometry import PointSet, segment_union_diameter, stencil_radius
from .kernels import DiffOperator, KernelSpec
from .stencil import StencilProblem, compute_weights

MIN_LEVELS = 4
SLOPE_MARGIN = 0.1
OUTLIER_FACTOR = 3.0
# log-space residuals below this are round-off, not pre-asymptotic behaviour
RESIDUAL_FLOOR = 1e-8
# relative round-off floors below which a value carries no information
ERROR_FLOOR = 1e-12
Q_FLOOR = 1e-13


class TestFunction:
    """Entire test function with analytically coded partial derivatives.

    ``sin``: ``f(x) = sin(c.x + phase)``; ``exp``: ``f(x) = exp(c.x)``.
    """

    __test__ = False  # keep pytest from collecting this class

    def __init__(self, name: str, d: int, c=None, phase: float = 0.3):
        if name not in ("sin", "exp"):
            raise ValueError(f"unknown test function {name!r}")
        if c is None:
            c = [0.9, -0.6, 0.4][:d] if d <= 3 else np.linspace(0.9, -0.6, d)
        c = np.asarray(c, dtype=float)
        if c.shape != (d,):
            raise ValueError(f"test function needs {d} frequencies")
        self.name, self.c, self.phase = name, c, float(phase)

    def __call__(self, x) -> np.ndarray:
        t = np.atleast_2d(np.asarray(x, dtype=float)) @ self.c
        if self.name == "sin":
            return np.sin(t + self.phase)
        return np.exp(t)

    def partial(self, alpha, x) -> float:
        t = float(np.asarray(x, dtype=float) @ self.c)
        ca = float(np.prod(self.c ** np.asarray(alpha)))
        if self.name == "sin":
            return ca * math.sin(t + self.phase + 0.5 * math.pi * sum(alpha))
        return ca * math.exp(t)

    def apply_operator(self, D: DiffOperator, z) -> float:
        return sum(coef * self.partial(alpha, z) for alpha, coef in D.terms)

    def to_json(self) -> dict:
        out = {"name": self.name, "c": self.c.tolist()}
        if self.name == "sin":
            out["phase"] = self.phase
        return out


@dataclass
class SlopeFit:
    slope: float | None
    status: str  # "ok" or "degenerate"
    used_levels: list[int] = field(default_factory=list)
    excluded_coarsest: bool = False

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "status": self.status,
            "used_levels": self.used_levels,
            "excluded_coarsest": self.excluded_coarsest,
        }


def fit_slope(h, values, floors=None) -> SlopeFit:
    """Least-squares slope of ``log(values)`` against ``log(h)``.

    Values at or below their round-off floor are dropped; fewer than two
    remaining points give status ``"degenerate"``.  With four or more points
    the coarsest level is dropped when its residual to the fit through the
    other levels exceeds three times their largest residual.
    """
    h = np.asarray(h, dtype=float)
    v = np.asarray(values, dtype=float)
    floors = np.zeros_like(v) if floors is None else np.asarray(floors, dtype=float)
    idx = [i for i in range(len(v)) if np.isfinite(v[i]) and v[i] > floors[i] and v[i] > 0]
    if len(idx) < 2:
        return SlopeFit(None, "degenerate", idx)

    def _fit(ids):
        x, y = np.log(h[ids]), np.log(v[ids])
        coef = np.polyfit(x, y, 1)
        return coef, y - np.polyval(coef, x)

    slope = _fit(idx)[0][0]
    excluded = False
    if len(idx) >= MIN_LEVELS:
        # judge the coarsest level against the fit through the others, since a
        # single high-leverage outlier drags a fit that includes it
        coarse = idx[int(np.argmax(h[idx]))]
        rest = [i for i in idx if i != coarse]
        coef, res_rest = _fit(rest)
        r_coarse = abs(np.log(v[coarse]) - np.polyval(coef, np.log(h[coarse])))
        if r_coarse > OUTLIER_FACTOR * max(np.abs(res_rest).max(), RESIDUAL_FLOOR):
            idx, slope, excluded = rest, coef[0], True
    return SlopeFit(float(slope), "ok", idx, excluded)


@dataclass
class ConvergenceReport:
    rows: list[dict]
    slopes: dict[str, SlopeFit]
    predicted_order: float
    flags: list[str]
    seminorm: dict
    test_function: dict

    def to_json(self) -> dict:
        return {
            "predicted_order": self.predicted_order,
            "slopes": {k: f.to_json() for k, f in self.slopes.items()},
            "flags": self.flags,
            "seminorm": self.seminorm,
            "test_function": self.test_function,
            "rows": self.rows,
        }

    def csv_rows(self) -> list[list[float]]:
        return [[r["h"], r["error"], r["p"], r["rhs"]] for r in self.rows]


def _level(kernel, D, s, z, offsets, level, f, seminorm, q, mu, samples, seed) -> dict:
    ps = PointSet(z, z + level * offsets)
    prob = StencilProblem(kernel, D, ps, s)
    res = compute_weights(prob)
    pw = power_function(prob, res)
    bd = assemble_error_bound(
        prob, samples=samples, seed=seed, result=res, power=pw, seminorm=seminorm, q=q, mu=mu
    )
    fv = f(ps.nodes)
    exact = f.apply_operator(D, z)
    approx = float(res.weights @ fv)
    err = abs(exact - approx)
    ref = abs(exact) + float(np.sum(np.abs(res.weights * fv)))
    qscale = quadratic_form_scale(prob, res.weights)
    return {
        "level": float(level),
        "h": stencil_radius(ps),
        "error": err,
        "p": pw.p,
        "rhs": bd.rhs,
        "rho": bd.rho.value,
        "certified": bd.certified,
        "error_floor": ERROR_FLOOR * ref,
        "p_floor": math.sqrt(Q_FLOOR * qscale),
        "rhs_floor": ERROR_FLOOR * bd.rhs if bd.rhs > 0 else 0.0,
    }


def run_convergence(
    kernel: KernelSpec,
    D: DiffOperator,
    ps: PointSet,
    levels,
    s: int | None = None,
    test_function: TestFunction | None = None,
    seminorm_mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    q: int | None = None,
    mu: float | None = None,
    max_workers: int | None = None,
) -> ConvergenceReport:
    """Solve every dilation level concurrently and fit log-log slopes."""
    levels = [float(v) for v in levels]
    if len(levels) < MIN_LEVELS:
        raise ValueError(f"a convergence sweep needs at least {MIN_LEVELS} levels")
    if any(not v > 0 for v in levels):
        raise ValueError("levels must be positive")
    s = kernel.s if s is None else s
    f = test_function or TestFunction("sin", ps.dim)
    z = ps.center
    offsets = ps.offsets()

    # fixed ball: the union of segments at the coarsest level
    coarse = PointSet(z, z + max(levels) * offsets)
    radius = segment_union_diameter(coarse) or 1.0
    sem = phi_holder_seminorm(kernel, ps.dim, radius, seminorm_mode, samples, seed)

    def task(level):
        return _level(kernel, D, s, z, offsets, level, f, sem, q, mu, samples, seed)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(task, levels))

    h = [r["h"] for r in rows]
    slopes = {
        "error": fit_slope(h, [r["error"] for r in rows], [r["error_floor"] for r in rows]),
        "p": fit_slope(h, [r["p"] for r in rows], [r["p_floor"] for r in rows]),
        "rhs": fit_slope(h, [r["rhs"] for r in rows], [r["rhs_floor"] for r in rows]),
    }
    q0, mu0 = bound_parameters(kernel, s)
    predicted = (mu0 if mu is None else mu) - D.order
    flags = [
        f"{name}_slope_below_prediction"
        for name, fit in slopes.items()
        if fit.status == "ok" and fit.slope < predicted - SLOPE_MARGIN
    ]
    return ConvergenceReport(rows, slopes, predicted, flags, sem.to_json(), f.to_json())
