import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lbmh.balancing import (
    from_even_function,
    make_balancing,
    to_even_function,
)

ALL_KINDS = [
    ("barker", {}),
    ("sqrt", {}),
    ("min", {}),
    ("max", {}),
    ("g_gamma", {"gamma": 0.3}),
    ("g_gamma", {"gamma": 1.7}),
]

GRID = np.linspace(-30.0, 30.0, 121)


@pytest.mark.parametrize("kind,kw", ALL_KINDS)
def test_balancing_identity_logform(kind, kw):
    g = make_balancing(kind, **kw)
    resid = g.b(GRID) - GRID - g.b(-GRID)
    assert np.max(np.abs(resid)) < 1e-12 * np.max(1.0 + np.abs(g.b(GRID)))


@pytest.mark.parametrize("kind,kw", ALL_KINDS)
def test_g_of_one_is_one_and_b0_zero(kind, kw):
    g = make_balancing(kind, **kw)
    assert g.g(1.0) == pytest.approx(1.0, abs=1e-14)
    assert g.b(0.0) == 0.0


def test_stored_curvatures():
    assert make_balancing("barker").gfrak == -0.5
    assert make_balancing("sqrt").gfrak == -0.25
    assert make_balancing("g_gamma", gamma=0.7).gfrak == pytest.approx(0.49 - 0.25, abs=1e-15)
    assert make_balancing("min").gfrak is None
    assert make_balancing("max").gfrak is None


@pytest.mark.parametrize("kind,kw", [k for k in ALL_KINDS if k[0] not in ("min", "max")])
def test_curvature_matches_finite_difference(kind, kw):
    g = make_balancing(kind, **kw)
    h = 1e-4
    fd = (g.g(1.0 + h) - 2.0 * g.g(1.0) + g.g(1.0 - h)) / h**2
    assert fd == pytest.approx(g.gfrak, abs=1e-5)


def test_gamma_zero_collapses_to_sqrt():
    g0 = make_balancing("g_gamma", gamma=0.0)
    assert g0.g(2.5) == pytest.approx(np.sqrt(2.5), rel=1e-15)


def test_barker_values():
    g = make_balancing("barker")
    t = 3.0
    assert g.g(t) == pytest.approx(2 * t / (1 + t), rel=1e-14)
    # saturates at log 2 without overflow
    assert g.b(700.0) == pytest.approx(np.log(2.0), abs=1e-12)
    assert np.isfinite(g.b(-700.0))


def test_sqrt_b_is_half_x():
    g = make_balancing("sqrt")
    x = np.array([-11.0, 0.3, 5.0])
    assert np.all(g.b(x) == 0.5 * x)


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        make_balancing("g_gamma", gamma=-0.1)


def test_from_even_constant_gives_sqrt():
    g = from_even_function(lambda x: np.ones_like(np.asarray(x, dtype=float)))
    t = np.array([0.2, 1.0, 7.0])
    assert np.allclose(g.g(t), np.sqrt(t), rtol=1e-14)


def test_from_even_sech_gives_barker():
    # sqrt(t) * sech(log(t)/2), rescaled, is algebraically 2t/(1+t)
    g = from_even_function(lambda x: 1.0 / np.cosh(np.asarray(x, dtype=float) / 2.0))
    barker = make_balancing("barker")
    x = np.linspace(-5, 5, 41)
    assert np.allclose(g.b(x), barker.b(x), atol=1e-12)


def test_from_even_polynomial_satisfies_identity():
    g = from_even_function(lambda x: 1.0 + np.asarray(x, dtype=float) ** 2)
    x = np.linspace(-5, 5, 41)
    assert np.max(np.abs(g.b(x) - x - g.b(-x))) < 1e-12


def test_from_even_rejects_odd_h():
    with pytest.raises(ValueError):
        from_even_function(lambda x: 1.0 + np.asarray(x, dtype=float))


def test_to_even_of_sqrt_is_one():
    h = to_even_function(make_balancing("sqrt"))
    x = np.linspace(-5, 5, 41)
    assert np.allclose(h(x), 1.0, atol=1e-14)


def test_to_even_of_barker_is_even():
    h = to_even_function(make_balancing("barker"))
    assert h(1.2) == pytest.approx(h(-1.2), rel=1e-14)


def test_round_trip_g_gamma():
    g = make_balancing("g_gamma", gamma=0.3)
    back = from_even_function(to_even_function(g))
    x = np.linspace(-5, 5, 41)
    assert np.max(np.abs(back.b(x) - g.b(x))) < 1e-12


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=3, max_size=3),
    st.floats(min_value=0.05, max_value=2.0),
)
def test_even_poly_gaussian_envelopes_balance(coeffs, width):
    a, b, c = coeffs

    def h(x):
        x = np.asarray(x, dtype=float)
        poly = (a + b * x**2 + c * x**4) ** 2 + 0.1
        return poly * np.exp(-((x * width) ** 2))

    g = from_even_function(h)
    x = np.linspace(-5, 5, 21)
    assert np.max(np.abs(g.b(x) - x - g.b(-x))) < 1e-12 * np.max(1 + np.abs(g.b(x)))
