import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hbvm.legendre import LegendreBasis, build_spectral, eval_basis, eval_integrals, xi
from oracles import orthonormal_integral, orthonormal_value


def test_p0_is_one():
    assert eval_basis(LegendreBasis(1), 0.37).tolist() == [1.0]


def test_midpoint_values_match_gram_schmidt():
    expected = orthonormal_value(2, 0.5)
    np.testing.assert_allclose(expected, [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(eval_basis(LegendreBasis(2), 0.5), expected, atol=1e-15)


def test_right_endpoint_values():
    expected = orthonormal_value(3, 1.0)
    np.testing.assert_allclose(expected, [1.0, math.sqrt(3), math.sqrt(5)], rtol=1e-15)
    np.testing.assert_allclose(eval_basis(LegendreBasis(3), 1.0), expected, rtol=1e-14)


@pytest.mark.parametrize("x", [0.0, 0.1, 0.33, 0.5, 0.9, 1.0])
def test_basis_matches_gram_schmidt(x):
    np.testing.assert_allclose(eval_basis(LegendreBasis(8), x), orthonormal_value(8, x), atol=1e-13)


@pytest.mark.parametrize("x", [-1e-12, 1.0000001, float("nan")])
def test_domain_error(x):
    with pytest.raises(ValueError):
        eval_basis(LegendreBasis(3), x)
    with pytest.raises(ValueError):
        eval_integrals(LegendreBasis(3), x)


def test_array_evaluation_shape():
    vals = eval_basis(LegendreBasis(4), np.linspace(0, 1, 7))
    assert vals.shape == (7, 4)


def test_exact_degree():
    # leading coefficient is nonzero and the next-higher finite difference vanishes
    x = np.linspace(0, 1, 12)
    vals = eval_basis(LegendreBasis(6), x)
    for j in range(6):
        coeffs = np.polyfit(x, vals[:, j], 8)
        assert np.all(np.abs(coeffs[: 8 - j]) < 1e-6)
        assert abs(coeffs[8 - j]) > 1e-3


def test_integrals_trivial_and_endpoint():
    np.testing.assert_allclose(eval_integrals(LegendreBasis(1), 0.25), [0.25], rtol=1e-15)
    assert eval_integrals(LegendreBasis(2), 1.0).tolist() == [1.0, 0.0]
    assert eval_integrals(LegendreBasis(5), 0.0).tolist() == [0.0] * 5


def test_integral_at_half():
    from scipy.integrate import quad

    numeric = quad(lambda x: math.sqrt(3) * (2 * x - 1), 0, 0.5)[0]
    assert numeric == pytest.approx(-math.sqrt(3) / 4, abs=1e-14)
    np.testing.assert_allclose(eval_integrals(LegendreBasis(2), 0.5), [0.5, -math.sqrt(3) / 4], atol=1e-15)


@pytest.mark.parametrize("i,expected", [(0, 0.5), (1, 0.288675134594813), (2, 0.129099444873581)])
def test_xi_values(i, expected):
    assert xi(i) == pytest.approx(expected, abs=1e-15)
    assert xi(i) == pytest.approx(1 / (2 * math.sqrt(abs(4 * i * i - 1))), rel=1e-15)


def test_spectral_s1_s2():
    sp1 = build_spectral(1)
    assert sp1.X.tolist() == [[0.5]]
    np.testing.assert_allclose(sp1.Xhat, [[0.5], [xi(1)]])
    sp2 = build_spectral(2)
    r3 = 1 / (2 * math.sqrt(3))
    np.testing.assert_allclose(sp2.X, [[0.5, -r3], [r3, 0.0]], rtol=1e-15)
    np.testing.assert_allclose(sp2.Xhat[2], [0.0, 1 / (2 * math.sqrt(15))], rtol=1e-15)


@pytest.mark.parametrize("s", range(1, 9))
def test_spectral_structure(s):
    sp = build_spectral(s)
    assert sp.X.shape == (s, s) and sp.Xhat.shape == (s + 1, s)
    np.testing.assert_array_equal(sp.Xhat[:s], sp.X)
    assert sp.Xhat[s, s - 1] == xi(s) and not sp.Xhat[s, : s - 1].any()
    assert sp.X[0, 0] == 0.5
    for i in range(1, s):
        assert sp.X[i, i - 1] == xi(i) and sp.X[i - 1, i] == -xi(i) and sp.X[i, i] == 0.0
    assert np.count_nonzero(np.triu(sp.X, 2)) == 0 and np.count_nonzero(np.tril(sp.X, -2)) == 0


def test_spectral_is_immutable():
    with pytest.raises(ValueError):
        build_spectral(3).X[0, 0] = 1.0


@pytest.mark.parametrize("r", range(1, 9))
def test_orthonormality(r):
    t, w = np.polynomial.legendre.leggauss(2 * r)
    x, w = (t + 1) / 2, w / 2
    P = eval_basis(LegendreBasis(r), x)
    assert np.max(np.abs(P.T @ (w[:, None] * P) - np.eye(r))) < 1e-13


@pytest.mark.parametrize("r", [1, 3, 8])
def test_integral_identity_on_grid(r):
    t, w = np.polynomial.legendre.leggauss(r + 1)
    for c in np.linspace(0, 1, 101):
        x = c * (t + 1) / 2
        numeric = (c * w / 2) @ eval_basis(LegendreBasis(r), x)
        assert np.max(np.abs(eval_integrals(LegendreBasis(r), c) - numeric)) < 1e-12


@pytest.mark.parametrize("s", range(1, 9))
def test_column_identity(s):
    grid = np.linspace(0, 1, 101)
    lhs = eval_integrals(LegendreBasis(s), grid)
    rhs = eval_basis(LegendreBasis(s + 1), grid) @ build_spectral(s).Xhat
    assert np.max(np.abs(lhs - rhs)) < 1e-13


@given(st.floats(0.0, 1.0), st.integers(1, 8))
def test_integrals_match_exact_antiderivative(c, r):
    np.testing.assert_allclose(eval_integrals(LegendreBasis(r), c), orthonormal_integral(r, c), atol=1e-13)


def test_basis_rejects_bad_size():
    with pytest.raises(ValueError):
        LegendreBasis(0)
    with pytest.raises(ValueError):
        build_spectral(0)
