import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ancfsk.numerics import (
    bessel_k0,
    exp1,
    log_bessel_i0,
    log_hyperu_table,
    log_whittaker_table,
    log_whittaker_w_neg_half,
    max_star,
    max_star_array,
)

mp.mp.dps = 30


def whittaker_by_quadrature(n, x):
    """W_{-(n+1/2),0}(x) from the amplitude integral int u^n e^-u K0(c sqrt u) du.

    Inverts the Gradshteyn 6.643-3 step: the integral equals
    n!^2 / c * exp(c^2/8) * W(c^2/4), so c = 2 sqrt(x).
    """
    n = int(n)
    x = mp.mpf(x)
    c = 2 * mp.sqrt(x)
    f = lambda u: u**n * mp.exp(-u) * mp.besselk(0, c * mp.sqrt(u))
    pts = [0, max(n, 1), 2 * n + 10, mp.inf]
    with mp.workdps(20):
        integral = mp.quad(f, pts)
    return c * mp.exp(-c**2 / 8) * integral / mp.factorial(n) ** 2


# ---- max_star -------------------------------------------------------------


def test_max_star_equal_args():
    assert max_star([1.7, 1.7]) == pytest.approx(1.7 + math.log(2), abs=1e-15)


def test_max_star_absorbs_neg_inf():
    assert max_star([0.0, -math.inf]) == 0.0
    assert max_star([-math.inf, -math.inf]) == -math.inf


def test_max_star_matches_direct_sum():
    expected = float(mp.log(mp.e**1 + mp.e**2 + mp.e**3))
    assert max_star([1.0, 2.0, 3.0]) == pytest.approx(expected, abs=1e-14)


def test_max_star_empty_is_an_error():
    with pytest.raises(ValueError):
        max_star([])


@pytest.mark.parametrize("k", [1, 2, 3, 7, 16, 33, 64])
@pytest.mark.parametrize("x", [-700.0, -3.2, 0.0, 12.5, 650.0])
def test_max_star_k_copies(k, x):
    assert abs(max_star([x] * k) - (x + math.log(k))) <= 1e-12 * max(1.0, abs(x))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=20),
    st.randoms(use_true_random=False),
)
def test_max_star_permutation_invariant(vals, rnd):
    shuffled = list(vals)
    rnd.shuffle(shuffled)
    assert max_star(shuffled) == pytest.approx(max_star(vals), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-300, 300, allow_nan=False), min_size=1, max_size=12))
def test_max_star_array_agrees_with_fold(vals):
    assert max_star_array(np.array(vals)) == pytest.approx(max_star(vals), abs=1e-12)


def test_max_star_array_all_neg_inf_rows():
    a = np.array([[-np.inf, -np.inf], [0.0, -np.inf]])
    out = max_star_array(a, axis=1)
    assert out[0] == -np.inf and out[1] == 0.0


# ---- Bessel functions ---------------------------------------------------------


def test_log_i0_at_zero():
    assert log_bessel_i0(0.0) == 0.0


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.7, 2.0, 5.0, 12.0])
def test_log_i0_matches_power_series(x):
    xs = mp.mpf(x)
    series = mp.nsum(lambda n: xs ** (2 * n) / (4**n * mp.factorial(n) ** 2), [0, mp.inf])
    assert log_bessel_i0(x) == pytest.approx(float(mp.log(series)), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("x", [1e3, 1e4, 1e5])
def test_log_i0_large_argument_asymptote(x):
    # next term of the expansion is 1/(8x); include it so 1e-8 is meaningful
    asym = x - 0.5 * math.log(2 * math.pi * x) + math.log1p(1 / (8 * x))
    assert log_bessel_i0(x) == pytest.approx(asym, rel=1e-8)
    assert math.isfinite(log_bessel_i0(x))


def test_log_i0_rejects_negative():
    with pytest.raises(ValueError):
        log_bessel_i0(-1.0)


def test_k0_integral_representation():
    # the integrand is below 1e-4000 beyond t = 10
    ref = mp.quad(lambda t: mp.exp(-mp.cosh(t)), [0, 2, 5, 10])
    assert bessel_k0(1.0) == pytest.approx(float(ref), rel=1e-13)


@pytest.mark.parametrize("x", [200.0, 500.0])
def test_k0_asymptotic_decay(x):
    asym = math.exp(-x) * math.sqrt(math.pi / (2 * x)) * (1 - 1 / (8 * x))
    assert bessel_k0(x) == pytest.approx(asym, rel=1e-6)


def test_k0_monotone_and_domain():
    assert bessel_k0(1.0) > bessel_k0(2.0)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            bessel_k0(bad)


# ---- exponential integral and Whittaker ------------------------------------


@pytest.mark.parametrize("x", [0.01, 0.3, 1.0, 7.5, 60.0])
def test_exp1_by_quadrature(x):
    ref = mp.quad(lambda t: mp.exp(-x * t) / t, [1, 2, 10, mp.inf])
    assert exp1(x) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("x", np.logspace(-2, 2, 9))
def test_whittaker_order_zero_exp_integral_identity(x):
    expected = 0.5 * math.log(x) + 0.5 * x + math.log(exp1(x))
    assert log_whittaker_w_neg_half(0, x) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("x", [1e-6, 0.05, 2.0, 42.0])
@pytest.mark.parametrize("n", [0, 4, 50])
def test_whittaker_against_integral_oracle(n, x):
    ref = whittaker_by_quadrature(n, x)
    got = math.exp(log_whittaker_w_neg_half(n, x))
    assert got == pytest.approx(float(ref), rel=1e-8)


@pytest.mark.parametrize("x", [1e-7, 3e-4, 0.02, 0.3, 1.0, 5.0, 30.0, 90.0])
def test_whittaker_table_against_mpmath(x):
    table = log_whittaker_table(120, x)
    for n in (0, 3, 17, 50, 99, 120):
        ref = mp.log(mp.whitw(-(n + mp.mpf(1) / 2), 0, x))
        assert table[n] == pytest.approx(float(ref), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("x", [1e-7, 1e-3, 0.1, 1.0, 8.0, 80.0])
def test_whittaker_strictly_decreasing_in_order(x):
    t = log_whittaker_table(60, x)
    assert np.all(np.diff(t) < 0)
    assert np.all(np.isfinite(t))


def test_forward_and_backward_recurrences_meet():
    # x chosen where both branches are accurate
    from ancfsk.numerics import _log_hyperu_backward, _log_hyperu_forward

    x = 0.05
    np.testing.assert_allclose(_log_hyperu_forward(60, x), _log_hyperu_backward(60, x), rtol=1e-12, atol=1e-13)


def test_whittaker_rejects_bad_input():
    with pytest.raises(ValueError):
        log_whittaker_w_neg_half(0, 0.0)
    with pytest.raises(ValueError):
        log_whittaker_w_neg_half(-1, 1.0)
    with pytest.raises(ValueError):
        log_hyperu_table(3, -2.0)
