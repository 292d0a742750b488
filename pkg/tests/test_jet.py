"""Jet arithmetic against sympy and against algebraic identities."""

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from dfcb import jet as J
from dfcb.errors import OutOfShape, ShapeMismatch, SingularPoint
from dfcb.jet import Jet, JetShape, Point

SHAPE = JetShape(3, 2, 2)
coord = st.floats(-1.5, 1.5, allow_nan=False)


def _vars(x, y, t, shape=SHAPE):
    p = Point.make(x, y, t)
    return p, [J.jet_variable(v, p, shape) for v in "xyt"]


def _sympy_partials(expr, at, shape=SHAPE):
    X, Y, T = sp.symbols("x y t")
    f = expr(X, Y, T)
    out = {}
    for i in range(shape.order_x + 1):
        for j in range(shape.order_y + 1):
            for k in range(shape.order_t + 1):
                d = sp.diff(f, X, i, Y, j, T, k) if i + j + k else f
                out[(i, j, k)] = float(d.subs({X: at[0], Y: at[1], T: at[2]}))
    return out


@pytest.mark.parametrize("name,jet_f,sym_f", [
    ("poly", lambda x, y, t: x * x * y - 3 * t * x + 2,
     lambda x, y, t: x ** 2 * y - 3 * t * x + 2),
    ("exp-sin", lambda x, y, t: J.exp(0.7 * x - y) * J.sin(x + 2 * t),
     lambda x, y, t: sp.exp(sp.Rational(7, 10) * x - y) * sp.sin(x + 2 * t)),
    ("log-cos", lambda x, y, t: J.log(2.5 + J.cos(x * y)) + t * t * t,
     lambda x, y, t: sp.log(sp.Rational(5, 2) + sp.cos(x * y)) + t ** 3),
    ("ratio", lambda x, y, t: (1 + x) / (3 + y * y + t),
     lambda x, y, t: (1 + x) / (3 + y ** 2 + t)),
])
def test_partials_match_sympy(name, jet_f, sym_f):
    at = (0.3, -0.4, 0.6)
    p, (x, y, t) = _vars(*at)
    f = jet_f(x, y, t)
    exact = _sympy_partials(sym_f, at)
    for (i, j, k), val in exact.items():
        assert f.partial(i, j, k) == pytest.approx(val, rel=1e-12, abs=1e-12), (i, j, k)


def test_batched_matches_pointwise():
    xs = np.linspace(-1, 1, 7)
    p, (x, y, t) = _vars(xs, 0.2 * xs, 1 - xs)
    f = J.exp(x) * J.cos(y + t)
    for n in range(xs.size):
        _, (a, b, c) = _vars(xs[n], 0.2 * xs[n], 1 - xs[n])
        g = J.exp(a) * J.cos(b + c)
        np.testing.assert_allclose(f.coeffs[..., n], g.coeffs, rtol=1e-14, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord, st.floats(-2, 2), st.floats(-2, 2))
def test_ring_identities(x0, y0, t0, a, b):
    p, (x, y, t) = _vars(x0, y0, t0)
    f = a * x + y * t + 0.5
    g = J.sin(b * x) + t
    h = J.exp(y - x)
    lhs = (f * g) * h
    rhs = f * (g * h)
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose((f * (g + h)).coeffs, (f * g + f * h).coeffs, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose((f * g).coeffs, (g * f).coeffs, rtol=0, atol=0)


@settings(max_examples=60, deadline=None)
@given(coord, coord, coord)
def test_elementary_inverses(x0, y0, t0):
    p, (x, y, t) = _vars(x0, y0, t0)
    a = 0.4 * x - y + 0.3 * t * x
    one = J.exp(a) * J.exp(-a)
    np.testing.assert_allclose(one.coeffs, Jet.constant(1.0, p, SHAPE).coeffs, atol=1e-12)
    pyth = J.sin(a) * J.sin(a) + J.cos(a) * J.cos(a)
    np.testing.assert_allclose(pyth.coeffs, Jet.constant(1.0, p, SHAPE).coeffs, atol=1e-12)
    back = J.log(J.exp(a))
    np.testing.assert_allclose(back.coeffs, a.coeffs, atol=1e-12)
    b = 2.0 + J.sin(a)
    np.testing.assert_allclose((b * J.recip(b)).coeffs, Jet.constant(1.0, p, SHAPE).coeffs,
                               atol=1e-12)


def test_log_uses_magnitude():
    p, (x, y, t) = _vars(0.2, 0.0, 0.0)
    f = -(1.0 + x * x)
    lf = J.log(f)
    assert lf.value == pytest.approx(np.log(1.04))
    # derivative of log|f| is f'/f either way
    assert lf.partial(1) == pytest.approx(2 * 0.2 / 1.04)


def test_integer_power():
    p, (x, y, t) = _vars(0.7, 0.1, 0.2)
    f = x + y
    np.testing.assert_allclose((f ** 5).coeffs, (f * f * f * f * f).coeffs, rtol=1e-13)
    with pytest.raises(ValueError):
        f ** -1


def test_deriv_and_truncate_commute():
    p, (x, y, t) = _vars(0.1, 0.2, 0.3)
    f = J.exp(x * y) * J.sin(t - x)
    a = f.deriv("x").deriv("t")
    b = f.deriv("t").deriv("x")
    np.testing.assert_allclose(a.coeffs, b.coeffs)
    assert a.shape == JetShape(2, 2, 1)
    assert a.partial(1, 1, 0) == pytest.approx(f.partial(2, 1, 1))
    np.testing.assert_allclose(f.truncate(JetShape(1, 1, 1)).deriv("x").coeffs,
                               f.deriv("x").truncate(JetShape(0, 1, 1)).coeffs)


def test_shape_errors():
    p, (x, y, t) = _vars(0.0, 0.0, 0.0)
    small = x.truncate(JetShape(1, 1, 1))
    with pytest.raises(ShapeMismatch):
        x + small
    q, (x2, _, _) = _vars(1.0, 0.0, 0.0)
    with pytest.raises(ShapeMismatch):
        x * x2
    with pytest.raises(OutOfShape):
        x.partial(4)
    with pytest.raises(OutOfShape):
        small.truncate(SHAPE)
    with pytest.raises(OutOfShape):
        x.deriv("y", 3)


def test_singular_values():
    p, (x, y, t) = _vars(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))
    with pytest.raises(SingularPoint) as err:
        J.log(x)
    assert err.value.mask.tolist() == [True, False]
    r = J.recip(x, mask_singular=True)
    assert np.isnan(r.value[0]) and r.value[1] == 1.0


def _random_matrix(rng, n, p):
    x = J.jet_variable("x", p, SHAPE)
    return [[J.exp(rng.normal() * x) * rng.normal() + rng.normal() * x for _ in range(n)]
            for _ in range(n)], x


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_det_against_numpy(rng, n):
    p = Point.make(0.3, 0.1, -0.2)
    m, _ = _random_matrix(rng, n, p)
    vals = np.array([[e.value for e in row] for row in m])
    assert J.det(m).value == pytest.approx(np.linalg.det(vals), rel=1e-10, abs=1e-12)


def test_det_derivative_is_row_sum(rng):
    """d_x det M = sum over rows of det with that row differentiated."""
    p = Point.make(0.3, 0.1, -0.2)
    m, _ = _random_matrix(rng, 3, p)
    d = J.det(m).deriv("x")
    lower = SHAPE.lowered(0)
    total = None
    for r in range(3):
        mm = [[(e.deriv("x") if i == r else e.truncate(lower)) for e in row]
              for i, row in enumerate(m)]
        term = J.det(mm)
        total = term if total is None else total + term
    np.testing.assert_allclose(d.coeffs, total.coeffs, rtol=1e-10, atol=1e-12)


def test_det_rejects_bad_input():
    p = Point.make(0.0, 0.0, 0.0)
    one = Jet.constant(1.0, p, SHAPE)
    with pytest.raises(ValueError):
        J.det([[one, one]])
    with pytest.raises(ValueError):
        J.det([[one] * 6 for _ in range(6)])
