import math

import numpy as np
import pytest
import sympy as sp

from stencilcert.accuracy import power_function
from stencilcert.bounds import (
    EXACT,
    SAMPLED,
    assemble_error_bound,
    assemble_integer_order_bound,
    bound_parameters,
    cdr_constant,
    mixed_kernel_seminorm_estimate,
    phi_holder_seminorm,
    split_order,
)
from stencilcert.errors import InconsistentMomentsError, SmoothnessError
from stencilcert.geometry import PointSet, scale_point_set, segment_union_diameter
from stencilcert.kernels import DiffOperator, KernelSpec
from stencilcert.stencil import StencilProblem

from conftest import midpoint_problem_parts


def test_cdr_examples():
    assert cdr_constant(1, 2, 1.0) == pytest.approx(8 / 9, rel=1e-15)
    assert cdr_constant(2, 2, 1.0) == pytest.approx(16 / 9, rel=1e-15)
    assert cdr_constant(1, 3, 1.0) == pytest.approx(0.25, rel=1e-15)


def _cdr_symbolic(d, r, g):
    g = sp.Rational(g)
    if r % 2 == 0:
        num = 2 * sp.Integer(d) ** sp.Rational(r, 2)
        den = sp.prod([(g / 2 + i) ** 2 for i in range(1, r // 2 + 1)])
    else:
        num = sp.Integer(d) ** sp.Rational(r, 2)
        den = sp.prod([((1 + g) / 2 + i) ** 2 for i in range(1, r // 2 + 1)])
    return float(num / den)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", range(0, 7))
@pytest.mark.parametrize("g", ["1", "1/2", "9/10", "1/3"])
def test_cdr_matches_symbolic(d, r, g):
    assert cdr_constant(d, r, float(sp.Rational(g))) == pytest.approx(_cdr_symbolic(d, r, g), rel=1e-14)


def test_cdr_rejects_bad_arguments():
    with pytest.raises(ValueError):
        cdr_constant(1, -1, 1.0)
    with pytest.raises(ValueError):
        cdr_constant(1, 2, 0.0)


def test_split_order():
    assert split_order(2, 1.0) == (1, 0.5)
    assert split_order(3, 1.0) == (1, 1.0)
    assert split_order(0, 0.5) == (0, 0.25)
    m, t = split_order(3, 0.9)
    assert m + t == pytest.approx(1.95)


def test_phs_seminorm_exact_example():
    for radius in (0.01, 1.0, 10.0):
        est = phi_holder_seminorm(KernelSpec.phs(3.0), 1, radius)
        assert est.mode == EXACT and est.value == 6.0


def _grid_holder_1d(kernel, radius, n=801):
    # brute-force oracle on a dense grid including the origin
    t = np.linspace(-radius, radius, n)
    f = kernel.phi_partial((kernel.r,), t[:, None])
    dt = np.abs(t[:, None] - t[None, :])
    mask = dt > 0
    return float(np.max(np.abs(f[:, None] - f[None, :])[mask] / dt[mask] ** kernel.gamma))


@pytest.mark.parametrize("nu", [1.0, 1.5, 3.0, 3.5, 5.0, 7.0])
def test_phs_exact_against_grid(nu):
    k = KernelSpec.phs(nu)
    exact = phi_holder_seminorm(k, 1, 1.0).value
    grid = _grid_holder_1d(k, 1.0)
    assert grid <= exact * (1 + 1e-12)
    assert grid >= 0.97 * exact


@pytest.mark.parametrize("n", [0, 1, 2])
@pytest.mark.parametrize("radius", [0.5, 2.0])
def test_wendland_exact_against_grid(n, radius):
    k = KernelSpec.wendland(1, n)
    exact = phi_holder_seminorm(k, 1, radius).value
    grid = _grid_holder_1d(k, radius, 2001)
    assert grid <= exact * (1 + 1e-9)
    assert grid >= 0.97 * exact


def test_tps_sampled_reproducible():
    k = KernelSpec.tps(1, gamma=0.9)
    a = phi_holder_seminorm(k, 2, 1.0, seed=7)
    b = phi_holder_seminorm(k, 2, 1.0, seed=7)
    assert a.mode == SAMPLED and a.value > 0 and a.value == b.value
    assert a.to_json()["samples"] == a.samples and a.to_json()["seed"] == 7


def test_sampled_is_lower_estimate_of_exact():
    k = KernelSpec.phs(5.0)
    exact = phi_holder_seminorm(k, 1, 1.0).value
    sampled = phi_holder_seminorm(k, 1, 1.0, mode="sampled").value
    assert sampled <= exact * (1 + 1e-12)
    with pytest.raises(ValueError):
        phi_holder_seminorm(KernelSpec.phs(3.0), 2, 1.0, mode="exact")


def test_mixed_seminorm_separable_and_constant_shift():
    ps = PointSet([0.1, 0.0], [[1.0, 0.0], [0.0, 1.0], [-0.5, 0.7]])

    def separable(alpha, beta, x, y):
        return np.sin(x[:, 0]) * np.cos(x[:, 1]) + np.exp(y[:, 0] - y[:, 1])

    est = mixed_kernel_seminorm_estimate(None, ps, 0, 0.5, 1024, partial=separable)
    assert est == pytest.approx(0.0, abs=1e-10)
    k = KernelSpec.phs(3.0)
    from stencilcert.kernels import kernel_partial

    def shifted(alpha, beta, x, y):
        return kernel_partial(k, alpha, beta, x, y) + 17.0

    base = mixed_kernel_seminorm_estimate(k, ps, 0, 1.0, 1024)
    assert mixed_kernel_seminorm_estimate(None, ps, 0, 1.0, 1024, partial=shifted) == pytest.approx(base, rel=1e-12)


def test_mixed_seminorm_monotone_in_samples():
    ps = PointSet([0.3], [[0.0], [1.0], [0.8]])
    k = KernelSpec.phs(3.0)
    vals = [mixed_kernel_seminorm_estimate(k, ps, 1, 0.5, n) for n in (128, 256, 512, 1024)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_mixed_seminorm_smoothness_error():
    ps = PointSet([0.0], [[1.0]])
    with pytest.raises(SmoothnessError):
        mixed_kernel_seminorm_estimate(KernelSpec.phs(3.0), ps, 2, 0.5)


def test_hest2_midpoint():
    k = KernelSpec.phs(3.0)
    ps = PointSet([0.5], [[0.0], [1.0]])
    est = mixed_kernel_seminorm_estimate(k, ps, 1, 0.5, 4096)
    rhs = cdr_constant(1, 2, 1.0) * phi_holder_seminorm(k, 1, segment_union_diameter(ps)).value
    assert est <= rhs * (1 + 1e-12)


def test_midpoint_bound():
    rep = assemble_error_bound(StencilProblem(*midpoint_problem_parts()))
    assert rep.rho.value == pytest.approx(0.5**1.5, rel=1e-12)
    assert rep.c_dr == pytest.approx(8 / 9)
    assert rep.phi_seminorm.value == 6.0 and rep.phi_seminorm.mode == EXACT
    assert rep.rhs == pytest.approx(0.816496580927726, rel=1e-12)
    assert rep.P == pytest.approx(0.5) and rep.certified is True
    assert rep.rhs == pytest.approx(rep.rho.value * math.sqrt(rep.c_dr * rep.phi_seminorm.value))
    js = rep.to_json()
    for key in ("rho", "c_dr", "phi_seminorm", "rhs", "p", "q", "mu"):
        assert key in js


def test_center_in_nodes_bound_is_zero():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.5], [[0.0], [0.5], [1.0]])
    rep = assemble_error_bound(StencilProblem(k, DiffOperator.identity(1), ps))
    assert rep.rho.value == pytest.approx(0.0, abs=1e-15)
    assert rep.rhs == pytest.approx(0.0, abs=1e-14)
    assert rep.P == pytest.approx(0.0, abs=1e-7)


def test_collinear_transverse_has_no_bound():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0, 0.0], [[-1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InconsistentMomentsError):
        assemble_error_bound(StencilProblem(k, DiffOperator.partial((0, 1)), ps))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_wendland_parameters(n):
    k = KernelSpec.wendland(1, n, 0)
    q, mu = bound_parameters(k, 0)
    assert q == n + 1 and mu == n + 0.5
    ps = PointSet([0.3], [[0.0], [0.2], [0.5], [0.9]])
    rep = assemble_error_bound(StencilProblem(k, DiffOperator.identity(1), ps))
    assert rep.q_used == n + 1 and rep.mu_used == n + 0.5
    assert rep.certified is True


def test_phs_parameters():
    q, mu = bound_parameters(KernelSpec.phs(5.0), 3)
    assert (q, mu) == (3, 2.5)
    q, mu = bound_parameters(KernelSpec.phs(3.5), 2)
    assert (q, mu) == (2, 1.75)


def test_certified_randomized_1d(rng):
    for _ in range(20):
        nu = float(rng.choice([1.0, 3.0, 5.0, 2.5, 4.5]))
        k = KernelSpec.phs(nu)
        n = int(rng.integers(k.s + 1, 8))
        ps = PointSet([rng.uniform(-0.3, 0.3)], np.sort(rng.uniform(-1, 1, n))[:, None])
        D = DiffOperator.partial((min(k.max_operator_order(), 1),))
        rep = assemble_error_bound(StencilProblem(k, D, ps))
        assert rep.certified is True


def test_rhs_order_under_dilation_fixed_ball(rng):
    for nu, D in [(3.0, DiffOperator.partial((1, 0))), (5.0, DiffOperator.laplacian(2))]:
        k = KernelSpec.phs(nu)
        ps = PointSet([0.0, 0.0], rng.uniform(-1, 1, (10, 2)))
        sem = phi_holder_seminorm(k, 2, segment_union_diameter(ps), samples=512)
        hs = [2.0**-i for i in range(6)]
        rhs = [assemble_error_bound(StencilProblem(k, D, scale_point_set(ps, h)), seminorm=sem).rhs for h in hs]
        slope = np.polyfit(np.log(hs), np.log(rhs), 1)[0]
        assert abs(slope - (nu / 2 - D.order)) <= 0.02


def test_overrides_are_not_certified():
    rep = assemble_error_bound(StencilProblem(*midpoint_problem_parts()), q=3, mu=1.0)
    assert rep.certified is None and rep.q_used == 3 and rep.mu_used == 1.0


def test_integer_order_variant():
    k = KernelSpec.phs(5.0, 3)
    ps = PointSet([0.1], [[-1.0], [-0.3], [0.4], [1.0]])
    prob = StencilProblem(k, DiffOperator.partial((1,)), ps)
    rep = assemble_integer_order_bound(prob)
    assert rep.variant == "integer_order" and rep.certified is None
    assert rep.q_used == 3 and rep.mu_used == 3.0
    assert rep.kernel_seminorm > 0 and rep.rhs >= 0
    assert rep.P == pytest.approx(power_function(prob).p)
    with pytest.raises(SmoothnessError):
        assemble_integer_order_bound(prob, q=5)


def test_line_reduction_certifies_collinear_inline():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0, 0.0], [[-1.0, 0.0], [1.0, 0.0]])
    rep = assemble_error_bound(StencilProblem(k, DiffOperator.partial((1, 0)), ps))
    assert rep.reduction == "line" and rep.certified is True
    assert rep.phi_seminorm.mode == EXACT
    assert math.isfinite(rep.rhs) and rep.P <= rep.rhs


def test_line_reduction_tilted_line_matches_1d(rng):
    from stencilcert.bounds import line_reduction

    u = np.array([0.6, 0.8])
    t = np.array([-1.0, -0.3, 0.4, 1.1])
    z = np.array([0.2, -0.1])
    ps = PointSet(z, z + np.outer(t, u))
    # second directional derivative (u . grad)^2
    D = DiffOperator((((2, 0), 0.36), ((1, 1), 0.96), ((0, 2), 0.64)))
    prob = StencilProblem(KernelSpec.phs(5.0, 3), D, ps)
    line = line_reduction(prob)
    assert line is not None
    assert line.D.terms == (((2,), pytest.approx(1.0)),)
    np.testing.assert_allclose(line.ps.nodes.ravel(), t, atol=1e-14)
    assert power_function(prob).p == pytest.approx(power_function(line).p, rel=1e-8)
    assert assemble_error_bound(prob).certified is True
    # a transverse component breaks the equivalence
    D_bad = DiffOperator((((2, 0), 1.0), ((0, 2), 1.0)))
    assert line_reduction(StencilProblem(KernelSpec.phs(5.0, 3), D_bad, ps)) is None
    off_line = PointSet(z, np.vstack([ps.nodes, [[0.5, 0.5]]]))
    assert line_reduction(StencilProblem(KernelSpec.phs(5.0, 3), D, off_line)) is None
