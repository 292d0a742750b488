"""Seed eigenfunctions and the Lax operators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PROFILE_PAIRS
from dfcb.grid import GridSpec
from dfcb.jet import JetShape, Point
from dfcb.seeds import (SeedSpec, apply_L, eval_seed, lax_residual, phases, seed_scalar,
                        trivial_background)

wavenumber = st.floats(-2, 2).filter(lambda k: abs(k) > 1e-3)
coef = st.floats(-3, 3)


def test_seed_validation():
    with pytest.raises(ValueError):
        SeedSpec(1.0, 0.0, 0.0, 0.0)
    with pytest.warns(UserWarning):
        SeedSpec(0.0, 1.0, 0.0, 0.0)
    s = SeedSpec(0.5, 1, 2, 3)
    assert SeedSpec.from_dict(s.to_dict()) == s


def test_phases_from_complex_wavenumber():
    """xi2 + i xi3 is the phase of e^{K x + K^3 y + (2K^3 + 3/2 K^2) t}, K = k(1 + i)."""
    k = 0.7
    K = k * (1 + 1j)
    ph = phases(k)
    for n, c in enumerate((K, K ** 3, 2 * K ** 3 + 1.5 * K ** 2)):
        assert ph.xi2[n] == pytest.approx(c.real)
        assert ph.xi3[n] == pytest.approx(c.imag)
    assert ph.xi1 == (k, k ** 3, 2 * k ** 3 + 1.5 * k ** 2)


def test_seed_jet_matches_numpy_and_fd():
    s = SeedSpec(-1.1, 0.5, 2.0, -1.0)
    x, y, t = np.meshgrid(*[np.linspace(-1, 1, 4)] * 3, indexing="ij")
    p = Point.make(x, y, t)
    psi = eval_seed(s, p, JetShape(3, 1, 1))
    np.testing.assert_allclose(psi.value, seed_scalar(s, x, y, t), rtol=1e-13)
    h = 1e-5
    scale = np.abs(psi.value) + 1
    fd = (seed_scalar(s, x + h, y, t) - seed_scalar(s, x - h, y, t)) / (2 * h)
    assert np.max(np.abs(psi.partial(1) - fd) / scale) < 1e-7
    fd_t = (seed_scalar(s, x, y, t + h) - seed_scalar(s, x, y, t - h)) / (2 * h)
    assert np.max(np.abs(psi.partial(0, 0, 1) - fd_t) / scale) < 1e-6


@settings(max_examples=40, deadline=None)
@given(wavenumber, coef, coef, coef)
def test_seed_solves_background_lax_pair(k, c1, c2, c3):
    if c1 == c2 == c3 == 0:
        c1 = 1.0
    s = SeedSpec(k, c1, c2, c3)
    g = GridSpec.cube(-1, 1, 4)
    p = g.points()
    for c in PROFILE_PAIRS:
        u, v = trivial_background(c, p, JetShape(3, 1, 1))
        rep = lax_residual(u, v, c, eval_seed(s, p, JetShape(3, 1, 1)), k)
        assert rep.worst <= 1e-10 and rep.masked_count == 0


def test_background_L_is_third_derivative():
    s = SeedSpec(0.9, 1.0, -1.0, 0.5)
    p = Point.make(0.2, -0.3, 0.4)
    c = PROFILE_PAIRS[1]
    u, v = trivial_background(c, p, JetShape(3, 1, 1))
    psi = eval_seed(s, p, JetShape(4, 1, 1))
    out, parts = apply_L(u, v, c, psi, terms=True)
    assert abs(parts[1].value) < 1e-15 and abs(parts[2].value) < 1e-15
    assert out.value == pytest.approx(psi.partial(3))


def test_lax_residual_detects_wrong_potential():
    s = SeedSpec(0.9, 1.0, -1.0, 0.5)
    p = GridSpec.cube(-1, 1, 3).points()
    c = PROFILE_PAIRS[0]
    u, v = trivial_background(c, p, JetShape(3, 1, 1))
    rep = lax_residual(u + 0.1, v, c, eval_seed(s, p, JetShape(3, 1, 1)), s.k)
    assert rep.worst > 1e-3
