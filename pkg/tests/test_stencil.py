import numpy as np
import pytest

from stencilcert.errors import InconsistentMomentsError, SingularSystemError
from stencilcert.geometry import PointSet
from stencilcert.kernels import DiffOperator, KernelSpec, kernel_matrix, operator_apply_kernel
from stencilcert.polyspace import PolyBasis, operator_moments
from stencilcert.stencil import (
    StencilProblem,
    apply_stencil,
    check_consistency,
    compute_weights,
    moment_residual,
)

from conftest import central_difference_parts, kernel_zoo, midpoint_problem_parts, random_stencil


def test_consistency_examples():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0, 0.0], [[-1.0, 0.0], [1.0, 0.0]])
    ok = check_consistency(StencilProblem(k, DiffOperator.partial((1, 0)), ps))
    assert ok["consistent"] and ok["residual"] < 1e-14
    bad = check_consistency(StencilProblem(k, DiffOperator.partial((0, 1)), ps))
    assert not bad["consistent"]
    assert bad["residual"] == pytest.approx(1.0)
    assert bad["augmented_rank"] == bad["rank"] + 1


def test_determining_set_always_consistent(rng):
    k = KernelSpec.phs(5.0, 3)
    for _ in range(10):
        ps = random_stencil(rng, 2, 9)
        assert check_consistency(StencilProblem(k, DiffOperator.laplacian(2), ps))["consistent"]


def test_midpoint_weights_and_aux():
    res = compute_weights(StencilProblem(*midpoint_problem_parts()))
    np.testing.assert_allclose(res.weights, [0.5, 0.5], rtol=1e-14)
    np.testing.assert_allclose(res.aux, [-0.375, 0.0], atol=1e-14)


def test_center_in_nodes_gives_unit_vector():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.5], [[0.0], [0.5], [1.0], [1.7]])
    res = compute_weights(StencilProblem(k, DiffOperator.identity(1), ps))
    np.testing.assert_allclose(res.weights, [0, 1, 0, 0], atol=1e-12)


@pytest.mark.parametrize("h", [1.0, 0.5, 2.0**-6])
def test_central_difference_weights(h):
    res = compute_weights(StencilProblem(*central_difference_parts(h)))
    np.testing.assert_allclose(res.weights, [-1 / (2 * h), 1 / (2 * h)], rtol=1e-12)


def test_collinear_inline_and_transverse():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0, 0.0], [[-1.0, 0.0], [1.0, 0.0]])
    res = compute_weights(StencilProblem(k, DiffOperator.partial((1, 0)), ps))
    np.testing.assert_allclose(res.weights, [-0.5, 0.5], rtol=1e-12)
    assert res.diagnostics["vandermonde_rank"] == 2
    with pytest.raises(InconsistentMomentsError, match=r"\(0, 1\)"):
        compute_weights(StencilProblem(k, DiffOperator.partial((0, 1)), ps))


def test_duplicate_nodes_are_singular():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0], [[-1.0], [1.0], [1.0]])
    with pytest.raises(SingularSystemError):
        compute_weights(StencilProblem(k, DiffOperator.partial((1,)), ps))


def test_apply_stencil_examples():
    assert apply_stencil([0.5, 0.5], [0.0, 1.0]) == 0.5
    assert apply_stencil([0, 1, 0], [3.0, 4.0, 5.0]) == 4.0
    h = 0.1
    val = apply_stencil([-1 / (2 * h), 1 / (2 * h)], [np.sin(-h), np.sin(h)])
    assert val == pytest.approx(np.sin(h) / h, rel=1e-14)
    with pytest.raises(ValueError):
        apply_stencil([1.0], [1.0, 2.0])


def test_problem_validation():
    k = KernelSpec.phs(3.0, 2)
    ps = PointSet([0.0], [[-1.0], [1.0]])
    with pytest.raises(ValueError):
        StencilProblem(k, DiffOperator.partial((1,)), ps, s=1)
    with pytest.raises(ValueError):
        StencilProblem(k, DiffOperator.partial((2,)), ps)
    with pytest.raises(ValueError):
        StencilProblem(k, DiffOperator.partial((1, 0)), ps)


def _instances(rng, count=12):
    ops = {1: [DiffOperator.identity(1), DiffOperator.partial((1,)), DiffOperator.partial((2,))],
           2: [DiffOperator.identity(2), DiffOperator.partial((1, 0)), DiffOperator.laplacian(2)]}
    out = []
    for i in range(count):
        kern = kernel_zoo()[i % 4]
        d = 1 + (i % 2)
        D = ops[d][i % 3]
        if D.order > kern.max_operator_order():
            D = ops[d][1]
        n = 6 + int(rng.integers(0, 7))
        out.append(StencilProblem(kern, D, random_stencil(rng, d, n, 0.6)))
    return out


def test_polynomial_exactness(rng):
    for prob in _instances(rng):
        res = compute_weights(prob)
        ps = prob.ps
        d = ps.dim
        basis = PolyBasis(d, prob.s, np.zeros(d))
        for _ in range(5):
            c = rng.standard_normal(basis.size)
            exact = c @ operator_moments(basis, prob.D, ps.center)
            approx = res.weights @ (basis.evaluate(ps.nodes) @ c)
            scale = 1 + np.abs(res.weights) @ np.abs(basis.evaluate(ps.nodes) @ c)
            assert abs(exact - approx) <= 1e-10 * scale


def test_kernel_translate_exactness(rng):
    for prob in _instances(rng):
        res = compute_weights(prob)
        ps = prob.ps
        d = ps.dim
        a = rng.standard_normal(ps.size)
        basis = PolyBasis(d, prob.s, ps.center)
        if basis.size:
            Q, _ = np.linalg.qr(basis.evaluate(ps.nodes))
            a -= Q @ (Q.T @ a)
        fvals = kernel_matrix(prob.kernel, ps.nodes, ps.nodes) @ a
        exact = np.asarray(operator_apply_kernel(prob.kernel, prob.D, ps.center, ps.nodes)) @ a
        scale = np.abs(a).sum() * (1 + np.abs(res.weights).sum()) * np.max(np.abs(fvals) + 1)
        assert abs(exact - res.weights @ fvals) <= 1e-9 * scale


def test_basis_independence(rng):
    for prob in _instances(rng):
        w1 = compute_weights(prob).weights
        w2 = compute_weights(prob, basis_center=np.zeros(prob.ps.dim)).weights
        np.testing.assert_allclose(w1, w2, rtol=1e-10, atol=1e-10 * np.abs(w1).max())


def test_uniqueness_on_rank_deficient_vandermonde():
    # collinear nodes: V rank-deficient, v non-unique, w* unique
    k = KernelSpec.phs(5.0, 3)
    t = np.array([-1.0, -0.4, 0.3, 1.0])
    ps = PointSet([0.1, 0.2], np.c_[t, np.zeros(4)] + [0.1, 0.2])
    prob = StencilProblem(k, DiffOperator.partial((1, 0)), ps)
    res = compute_weights(prob)
    assert res.diagnostics["vandermonde_rank"] < res.diagnostics["n_moments"]
    assert res.diagnostics["method"] == "nullspace"
    res0 = compute_weights(prob, basis_center=[0.0, 0.0])
    np.testing.assert_allclose(res.weights, res0.weights, rtol=1e-10, atol=1e-10)
    # two v vectors differing by a nullspace element of V give the same residual
    from stencilcert.polyspace import vandermonde

    basis = PolyBasis.centered(ps, 3)
    V = vandermonde(basis, ps)
    _, _, vt = np.linalg.svd(V)
    v2 = res.aux + vt[-1]
    A = kernel_matrix(k, ps.nodes, ps.nodes)
    np.testing.assert_allclose(A @ res.weights + V @ v2, A @ res.weights + V @ res.aux, atol=1e-10)
    resid, tol = moment_residual(prob, res.weights)
    assert resid <= tol
