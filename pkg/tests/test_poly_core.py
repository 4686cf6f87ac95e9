import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from holoflow.poly_core import ComplexPoly, RealPlanarField, parse_poly, to_real_field, xi_eta

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def polys(min_deg=0, max_deg=6):
    return st.lists(coef, min_size=min_deg + 1, max_size=max_deg + 1).filter(
        lambda c: abs(c[-1]) > 1e-3
    ).map(ComplexPoly)


def test_eval_examples():
    f = ComplexPoly([1, 0, 1])
    assert f(1j) == 0
    assert f(0) == 1
    assert ComplexPoly([0, -2, 0, 3])(2) == 20


def test_eval_array_matches_scalar():
    f = ComplexPoly([1 - 2j, 0.5, 3j])
    zs = np.array([0.3 + 1j, -2, 4j])
    assert np.allclose(f(zs), [f(z) for z in zs])


@given(polys(), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_horner_matches_monomial_sum(f, z):
    naive = sum(c * z**k for k, c in enumerate(f.coeffs.tolist()))
    scale = sum(abs(c) * abs(z) ** k for k, c in enumerate(f.coeffs.tolist()))
    assert abs(f(z) - naive) <= 1e-12 * max(scale, 1e-300)


def test_degree_trims_tiny_leading():
    f = ComplexPoly([1, 2, 1e-20])
    assert f.degree == 1
    assert ComplexPoly([0, 0]).is_zero()
    assert ComplexPoly([5]).degree == 0


def test_derivative_examples():
    assert ComplexPoly([1, 0, 1]).derivative() == ComplexPoly([0, 2])
    assert ComplexPoly([7]).derivative().is_zero()
    assert ComplexPoly([0, -2, 0, 3]).derivative() == ComplexPoly([-2, 0, 9])


def test_parse_poly():
    assert parse_poly("[[1,0],[0,0],[1,0]]") == ComplexPoly([1, 0, 1])
    assert parse_poly("[1, [0, 2]]") == ComplexPoly([1, 2j])
    for bad in ("", "{}", "[]", "[[1,2,3]]", "[\"a\"]"):
        with pytest.raises(ValueError):
            parse_poly(bad)


def test_xi_eta_examples():
    assert xi_eta(2, 3.0, 2.0) == (3.0**2 - 2.0**2, 2 * 3.0 * 2.0)
    for k in range(9):
        assert xi_eta(k, 1.0, 0.0) == (1.0, 0.0)
    assert xi_eta(4, 0.0, 1.0) == (1.0, 0.0)
    with pytest.raises(ValueError):
        xi_eta(-1, 0.0, 0.0)


@given(st.integers(0, 8), finite, finite)
def test_xi_eta_is_power(k, x, y):
    xi, eta = xi_eta(k, x, y)
    assert abs(complex(x, y) ** k - complex(xi, eta)) < 1e-9 * max(1.0, abs(complex(x, y)) ** k)


def test_real_field_examples():
    F = to_real_field(ComplexPoly([1, 0, 1]))
    expect_P = np.array([[1, 0, -1], [0, 0, 0], [1, 0, 0]])
    expect_Q = np.array([[0, 0, 0], [0, 2, 0], [0, 0, 0]])
    assert np.array_equal(F.P, expect_P) and np.array_equal(F.Q, expect_Q)
    R = to_real_field(ComplexPoly([0, 1j]))
    assert np.array_equal(R.P, [[0, -1], [0, 0]]) and np.array_equal(R.Q, [[0, 0], [1, 0]])
    C = to_real_field(ComplexPoly([0, 0, 0, 1]))
    assert C.P[3, 0] == 1 and C.P[1, 2] == -3 and C.Q[2, 1] == 3 and C.Q[0, 3] == -1
    assert np.count_nonzero(C.P) == 2 and np.count_nonzero(C.Q) == 2


@given(polys(1), finite, finite)
def test_real_field_matches_complex_eval(f, x, y):
    F = to_real_field(f)
    P, Q = F(x, y)
    w = f(complex(x, y))
    assert abs(complex(P, Q) - w) <= 1e-12 * max(1.0, abs(w)) + 1e-12 * float(np.sum(np.abs(f.coeffs))) * max(1, abs(complex(x, y))) ** f.degree


@given(polys(1), finite, finite)
def test_cauchy_riemann(f, x, y):
    J = to_real_field(f).jacobian(x, y)
    scale = max(1.0, float(np.max(np.abs(J))))
    assert abs(J[0, 0] - J[1, 1]) < 1e-10 * scale
    assert abs(J[0, 1] + J[1, 0]) < 1e-10 * scale


@given(polys(1), finite, finite, st.floats(0.1, 3))
def test_homogeneous_parts(f, x, y, lam):
    F = to_real_field(f)
    parts = F.parts()
    n = F.degree + 1

    def padded(a):
        out = np.zeros((n, n))
        out[: a.shape[0], : a.shape[1]] = a
        return out

    assert np.array_equal(sum(padded(p.P) for p in parts), F.P)
    assert np.array_equal(sum(padded(p.Q) for p in parts), F.Q)
    for k, Fk in enumerate(parts):
        a = Fk(lam * x, lam * y)
        b = Fk(x, y)
        for u, v in zip(a, b):
            assert abs(u - lam**k * v) <= 1e-10 * max(1.0, abs(u))


def test_real_field_validation():
    with pytest.raises(ValueError):
        RealPlanarField(np.ones((2, 2)), np.zeros((2, 2)))
    F = RealPlanarField(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((1, 1)))
    assert F.degree == 1 and not F.holomorphic
