"""Power function, native-space test functions and the worst-case error bound.

The squared worst-case error of a polynomially exact weight vector ``w`` over
the unit ball of the native space is the quadratic form::

    Q(w) = D'D''K(z,z) - 2 sum_j w_j D'K(z,x_j) + sum_ij w_i w_j K(x_i,x_j)

and the stencil weights ``w*`` minimise it; ``P = sqrt(Q(w*))``.

At ``w*`` the form also equals ``D'D''K(z,z) - sum_j w*_j D'K(z,x_j)
- sum_l v_l D p_l(z)``.  The last sum does not vanish in general, so the
two-term expression without it is kept only as the ``literal`` field of
:class:`PowerReport` for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ExactnessError, StencilCertError
from .kernels import (
    DiffOperator,
    KernelSpec,
    kernel_matrix,
    operator_apply_both,
    operator_apply_kernel,
)
from .polyspace import PolyBasis, operator_moments
from .stencil import StencilProblem, StencilResult, compute_weights, moment_residual


@dataclass(frozen=True)
class PowerReport:
    q_wstar: float
    p: float
    shortcut: float
    gap: float
    literal: float

    def to_json(self) -> dict:
        return {
            "q_wstar": self.q_wstar,
            "p": self.p,
            "shortcut": self.shortcut,
            "gap": self.gap,
            "literal_two_term": self.literal,
        }


def _form_terms(problem: StencilProblem, w: np.ndarray, bK: np.ndarray | None = None):
    kernel, D, ps = problem.kernel, problem.D, problem.ps
    dd = operator_apply_both(kernel, D, ps.center)
    if bK is None:
        bK = np.asarray(operator_apply_kernel(kernel, D, ps.center, ps.nodes), dtype=float)
    A = kernel_matrix(kernel, ps.nodes, ps.nodes)
    return dd, float(w @ bK), float(w @ A @ w)


def quadratic_form(problem: StencilProblem, w, check: bool = True) -> float:
    """Squared worst-case error ``Q(w)`` of a polynomially exact weight vector.

    Raises :class:`ExactnessError` if `w` is not exact on ``Pi_s``.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (problem.ps.size,):
        raise ValueError("weight vector has the wrong length")
    if check:
        res, tol = moment_residual(problem, w)
        if res > tol:
            raise ExactnessError(
                f"weights are not exact on polynomials of degree < {problem.s} "
                f"(moment residual {res:.3g})"
            )
    dd, wb, wAw = _form_terms(problem, w)
    return dd - 2.0 * wb + wAw


def quadratic_form_scale(problem: StencilProblem, w) -> float:
    """Magnitude of the largest term in ``Q(w)``; the round-off reference."""
    dd, wb, wAw = _form_terms(problem, np.asarray(w, dtype=float))
    return max(abs(dd), 2.0 * abs(wb), abs(wAw))


def power_function(problem: StencilProblem, result: StencilResult | None = None) -> PowerReport:
    """Power function at the stencil weights, computed two ways."""
    if result is None:
        result = compute_weights(problem)
    w = result.weights
    dd, wb, wAw = _form_terms(problem, w, result.kernel_rhs)
    q = dd - 2.0 * wb + wAw
    literal = dd - wb
    shortcut = literal - float(result.aux @ result.moments)
    return PowerReport(
        q_wstar=q,
        p=float(np.sqrt(max(q, 0.0))),
        shortcut=shortcut,
        gap=abs(q - shortcut),
        literal=literal,
    )


def _moment_basis(centers: np.ndarray, s: int) -> PolyBasis:
    mid = centers.mean(axis=0)
    spread = float(np.max(np.linalg.norm(centers - mid, axis=1)))
    return PolyBasis(centers.shape[1], s, mid, spread if spread > 0 else 1.0)


class NativeTestFunction:
    """``f(x) = sum_i a_i K(x, c_i) + p(x)`` with ``a`` orthogonal to ``Pi_s``.

    ``p`` is given by coefficients over the monomials ``x**alpha``
    (``|alpha| < s``, graded lexicographic order).  ``norm_K`` is the
    native-space seminorm ``sqrt(a^T K a)``.
    """

    def __init__(self, kernel: KernelSpec, s: int, centers, a, poly_coeffs=None):
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        a = np.asarray(a, dtype=float).reshape(-1)
        if a.shape[0] != centers.shape[0]:
            raise ValueError("one coefficient per center required")
        d = centers.shape[1]
        self.kernel = kernel
        self.s = s
        self.centers = centers
        self.a = a
        self.poly_basis = PolyBasis(d, s, np.zeros(d))
        if poly_coeffs is None:
            poly_coeffs = np.zeros(self.poly_basis.size)
        self.poly_coeffs = np.asarray(poly_coeffs, dtype=float).reshape(-1)
        if self.poly_coeffs.shape[0] != self.poly_basis.size:
            raise ValueError(f"expected {self.poly_basis.size} polynomial coefficients")
        mb = _moment_basis(centers, s)
        viol = float(np.linalg.norm(mb.evaluate(centers).T @ a))
        if viol > 1e-10 * max(1.0, float(np.sum(np.abs(a)))):
            raise ValueError(f"coefficients violate the moment conditions (residual {viol:.3g})")
        gram = kernel_matrix(kernel, centers, centers)
        self.norm_sq = float(a @ gram @ a)
        self.norm_K = float(np.sqrt(max(self.norm_sq, 0.0)))

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals = kernel_matrix(self.kernel, x, self.centers) @ self.a
        if self.poly_basis.size:
            vals = vals + self.poly_basis.evaluate(x) @ self.poly_coeffs
        return vals

    def apply_operator(self, D: DiffOperator, z) -> float:
        """``Df(z)`` through kernel derivatives and exact polynomial derivatives."""
        z = np.asarray(z, dtype=float)
        val = float(np.asarray(operator_apply_kernel(self.kernel, D, z, self.centers)) @ self.a)
        if self.poly_basis.size:
            val += float(operator_moments(self.poly_basis, D, z) @ self.poly_coeffs)
        return val


def make_native_test_function(kernel: KernelSpec, s: int, centers, a, poly_coeffs=None) -> NativeTestFunction:
    return NativeTestFunction(kernel, s, centers, a, poly_coeffs)


def random_native_test_function(
    kernel: KernelSpec, s: int, centers, rng: np.random.Generator, with_poly: bool = True
) -> NativeTestFunction:
    """Random admissible function: Gaussian ``a`` projected onto ``ker(V^T)``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    a = rng.standard_normal(centers.shape[0])
    mb = _moment_basis(centers, s)
    if mb.size:
        Q, _ = sla.qr(mb.evaluate(centers), mode="economic")
        a = a - Q @ (Q.T @ a)
        a = a - Q @ (Q.T @ a)
    coeffs = rng.standard_normal(PolyBasis(centers.shape[1], s, np.zeros(centers.shape[1])).size)
    if not with_poly:
        coeffs = np.zeros_like(coeffs)
    return NativeTestFunction(kernel, s, centers, a, coeffs)


def differentiation_error(
    problem: StencilProblem,
    f: NativeTestFunction,
    result: StencilResult | None = None,
    power: PowerReport | None = None,
) -> dict:
    """Actual stencil error on `f` next to the bound ``P * ||f||_K``."""
    if f.kernel.describe() | {"s": 0} != problem.kernel.describe() | {"s": 0} or f.s != problem.s:
        raise StencilCertError("test function does not belong to the problem's native space")
    if result is None:
        result = compute_weights(problem)
    if power is None:
        power = power_function(problem, result)
    exact = f.apply_operator(problem.D, problem.ps.center)
    approx = float(result.weights @ f(problem.ps.nodes))
    err = abs(exact - approx)
    bound = power.p * f.norm_K
    return {
        "error": err,
        "bound_PnormF": bound,
        "within_bound": err <= bound * (1.0 + 1e-8),
    }


def error_functional_representer(problem: StencilProblem, w, x) -> np.ndarray:
    """``(eps_w'' K)(x) = D'K(z, x) - sum_j w_j K(x, x_j)`` at the rows of `x`."""
    ps = problem.ps
    x = np.atleast_2d(np.asarray(x, dtype=float))
    first = np.asarray(operator_apply_kernel(problem.kernel, problem.D, ps.center, x), dtype=float)
    return first - kernel_matrix(problem.kernel, x, ps.nodes) @ np.asarray(w, dtype=float)

