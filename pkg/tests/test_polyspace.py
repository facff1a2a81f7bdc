import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stencilcert.geometry import PointSet
from stencilcert.kernels import DiffOperator
from stencilcert.polyspace import PolyBasis, operator_moments, poly_dim, vandermonde


def test_poly_dim_examples():
    assert poly_dim(2, 2) == 3
    assert poly_dim(1, 3) == 3
    assert poly_dim(3, 0) == 0
    for d in range(1, 5):
        for q in range(1, 7):
            assert poly_dim(d, q) == math.comb(d + q - 1, d) == PolyBasis(d, q, np.zeros(d)).size


def test_vandermonde_examples():
    ps = PointSet([0.3, 0.1], [[0.3, 0.1]])
    V = vandermonde(PolyBasis.centered(ps, 3), ps)
    np.testing.assert_array_equal(V, [[1, 0, 0, 0, 0, 0]])
    h = 0.25
    ps = PointSet([0.0], [[-h], [h]])
    np.testing.assert_array_equal(vandermonde(PolyBasis.centered(ps, 2), ps), [[1, -h], [1, h]])
    ps = PointSet([0.0, 0.0], [[-1.0, 0.0], [1.0, 0.0]])
    np.testing.assert_array_equal(vandermonde(PolyBasis.centered(ps, 2), ps), [[1, -1, 0], [1, 1, 0]])


def test_operator_moment_examples():
    b = PolyBasis(2, 3, np.zeros(2))
    np.testing.assert_array_equal(operator_moments(b, DiffOperator.identity(2)), [1, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(operator_moments(b, DiffOperator.laplacian(2)), [0, 0, 0, 2, 0, 2])
    np.testing.assert_array_equal(
        operator_moments(PolyBasis(1, 2, np.zeros(1)), DiffOperator.partial((1,))), [0, 1]
    )


def _symbolic_Dp(coeffs, members, center, D, z):
    # oracle: differentiate the expanded polynomial term by term with numpy's polyder
    from numpy.polynomial import polynomial as P

    total = 0.0
    for c, alpha in zip(coeffs, members):
        for beta, a in D.terms:
            val = c * a
            for i, (ai, bi) in enumerate(zip(alpha, beta)):
                poly = P.polypow([-center[i], 1.0], ai)
                val *= P.polyval(z[i], P.polyder(poly, bi)) if bi else P.polyval(z[i], poly)
            total += val
    return total


@settings(max_examples=40, deadline=None)
@given(
    d=st.integers(1, 3),
    q=st.integers(1, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_moments_match_symbolic_derivative(d, q, seed):
    rng = np.random.default_rng(seed)
    center = rng.uniform(-1, 1, d)
    z = rng.uniform(-1, 1, d)
    basis = PolyBasis(d, q, center)
    coeffs = rng.standard_normal(basis.size)
    alphas = [tuple(int(v) for v in rng.integers(0, 3, d)) for _ in range(2)]
    D = DiffOperator(tuple((a, float(rng.standard_normal())) for a in alphas))
    got = coeffs @ operator_moments(basis, D, z)
    want = _symbolic_Dp(coeffs, basis.members, center, D, z)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12 * (1 + np.abs(coeffs).sum()))


def test_scaled_basis_moments():
    b1 = PolyBasis(2, 3, np.zeros(2))
    b2 = PolyBasis(2, 3, np.zeros(2), scale=0.5)
    m1 = operator_moments(b1, DiffOperator.laplacian(2))
    m2 = operator_moments(b2, DiffOperator.laplacian(2))
    np.testing.assert_allclose(m2, m1 / 0.25)


@pytest.mark.parametrize("d,q", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_vandermonde_full_rank_general_position(d, q, rng):
    M = poly_dim(d, q)
    ps = PointSet(np.zeros(d), rng.uniform(-1, 1, (M + 3, d)))
    assert np.linalg.matrix_rank(vandermonde(PolyBasis.centered(ps, q), ps)) == M


def test_vandermonde_rank_on_line():
    # quadratics restricted to a line form a 3-dimensional space
    t = np.linspace(-1, 1, 7)
    ps = PointSet([0.0, 0.0], np.c_[t, 2 * t])
    assert np.linalg.matrix_rank(vandermonde(PolyBasis.centered(ps, 3), ps)) == 3
