import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stype_sdfem.poly import (LagrangeBasis1D, gauss_legendre_rule, gauss_lobatto_nodes,
                              legendre_eval)


def test_legendre_examples():
    assert legendre_eval(0, 0.3) == (1.0, 0.0)
    assert legendre_eval(3, 1.0) == pytest.approx((1.0, 6.0), abs=1e-14)
    assert legendre_eval(2, 0.0) == pytest.approx((-0.5, 0.0), abs=1e-15)


@given(st.integers(0, 12), st.floats(-1, 1))
def test_legendre_matches_numpy(p, t):
    c = np.zeros(p + 1)
    c[p] = 1.0
    v, d = legendre_eval(p, t)
    assert v == pytest.approx(np.polynomial.legendre.legval(t, c), abs=1e-12)
    assert d == pytest.approx(np.polynomial.legendre.legval(t, np.polynomial.legendre.legder(c)), abs=1e-10)


def test_legendre_rejects_negative_degree():
    with pytest.raises(ValueError):
        legendre_eval(-1, 0.0)


def test_lobatto_small_cases():
    r = gauss_lobatto_nodes(1)
    np.testing.assert_allclose(r.nodes, [-1, 1])
    np.testing.assert_allclose(r.weights, [1, 1])
    r = gauss_lobatto_nodes(2)
    np.testing.assert_allclose(r.nodes, [-1, 0, 1], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-14)
    r = gauss_lobatto_nodes(3)
    s = 1 / math.sqrt(5)
    np.testing.assert_allclose(r.nodes, [-1, -s, s, 1], atol=1e-15)
    np.testing.assert_allclose(r.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], rtol=1e-14)


@pytest.mark.parametrize("p", range(1, 7))
def test_lobatto_exactness(p):
    r = gauss_lobatto_nodes(p)
    for k in range(2 * p):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(r.weights @ r.nodes**k - exact) <= 1e-13


@pytest.mark.parametrize("p", range(2, 16))
def test_lobatto_interior_nodes_are_roots(p):
    r = gauss_lobatto_nodes(p)
    _, d = legendre_eval(p, r.nodes[1:-1])
    assert np.max(np.abs(d)) <= 1e-12
    np.testing.assert_array_equal(r.nodes, -r.nodes[::-1])
    assert np.all(np.diff(r.nodes) > 0)


def test_lobatto_rejects_p0():
    with pytest.raises(ValueError):
        gauss_lobatto_nodes(0)


def test_gauss_legendre_examples():
    r = gauss_legendre_rule(1)
    np.testing.assert_allclose(r.nodes, [0.0])
    np.testing.assert_allclose(r.weights, [2.0])
    r = gauss_legendre_rule(2)
    np.testing.assert_allclose(r.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(r.weights, [1, 1], rtol=1e-15)
    assert gauss_legendre_rule(3).integrate(lambda t: t**4) == pytest.approx(0.4, abs=1e-14)


@pytest.mark.parametrize("n", range(1, 9))
def test_gauss_legendre_exactness(n):
    r = gauss_legendre_rule(n)
    for k in range(2 * n):
        exact = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        assert abs(r.weights @ r.nodes**k - exact) <= 1e-13


@pytest.mark.parametrize("p", [1, 2, 3, 5, 8])
def test_lagrange_cardinality_and_partition(p):
    b = LagrangeBasis1D.gauss_lobatto(p)
    np.testing.assert_allclose(b.values(b.nodes), np.eye(p + 1), atol=1e-13)
    t = np.linspace(-1, 1, 37)
    V, D, D2 = b.eval(t)
    np.testing.assert_allclose(V.sum(axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(D.sum(axis=1), 0.0, atol=1e-11)
    np.testing.assert_allclose(D2.sum(axis=1), 0.0, atol=1e-9)


@pytest.mark.parametrize("p", [2, 3, 4])
def test_lagrange_derivatives_match_finite_differences(p):
    b = LagrangeBasis1D.gauss_lobatto(p)
    t = np.linspace(-0.9, 0.9, 11)
    h = 1e-5
    _, D, D2 = b.eval(t)
    Vp, Vm = b.values(t + h), b.values(t - h)
    np.testing.assert_allclose(D, (Vp - Vm) / (2 * h), atol=1e-6)
    _, Dp, _ = b.eval(t + h)
    _, Dm, _ = b.eval(t - h)
    np.testing.assert_allclose(D2, (Dp - Dm) / (2 * h), atol=1e-5)


@settings(max_examples=30)
@given(st.integers(2, 6), st.lists(st.floats(-3, 3), min_size=7, max_size=7))
def test_lagrange_reproduces_polynomials(p, coef):
    b = LagrangeBasis1D.gauss_lobatto(p)
    poly = np.polynomial.Polynomial(coef[: p + 1])
    t = np.linspace(-1, 1, 23)
    V, D, D2 = b.eval(t)
    vals = poly(b.nodes)
    np.testing.assert_allclose(V @ vals, poly(t), atol=1e-11)
    np.testing.assert_allclose(D @ vals, poly.deriv()(t), atol=1e-9)
    np.testing.assert_allclose(D2 @ vals, poly.deriv(2)(t), atol=1e-7)


def test_equidistant_basis():
    b = LagrangeBasis1D.equidistant(3)
    np.testing.assert_allclose(b.nodes, [-1, -1 / 3, 1 / 3, 1])
    np.testing.assert_allclose(b.values(b.nodes), np.eye(4), atol=1e-14)
