import math

import numpy as np
import pytest
from scipy import stats

from ancfsk.channel import (
    ChannelParams,
    bc_phase,
    complex_gaussian,
    ma_phase,
    relay_scale_factor,
    sample_fading,
    stream_rng,
    two_way_relay,
)
from ancfsk.demod import case_variances
from ancfsk.modem import SymbolFrame


def rngs(seed, n=3):
    return [np.random.default_rng([seed, i]) for i in range(n)]


def test_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(N0=0.0)
    with pytest.raises(ValueError):
        ChannelParams(E1=-1.0)
    with pytest.raises(ValueError):
        ChannelParams(M=3)


def test_from_ebn0():
    p = ChannelParams.from_ebn0_db(10.0, M=4, rate=0.5)
    assert p.N0 == pytest.approx(0.1)
    assert (p.E1, p.E2, p.ER) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("M,N0", [(2, 1.0), (4, 0.5)])
def test_scale_factor_examples(M, N0):
    assert relay_scale_factor(ChannelParams(N0=N0, M=M)) == pytest.approx(0.5)


def test_fading_energy_law_of_large_numbers():
    h = sample_fading(1.0, 10**6, np.random.default_rng(0))
    assert np.mean(np.abs(h.gains) ** 2) == pytest.approx(1.0, rel=0.01)
    assert np.var(h.gains.real) == pytest.approx(0.5, rel=0.01)
    assert np.var(h.gains.imag) == pytest.approx(0.5, rel=0.01)


def test_fading_phase_uniform():
    h = sample_fading(1.0, 20000, np.random.default_rng(1))
    assert np.all((h.phase >= 0) & (h.phase < 2 * np.pi))
    assert stats.kstest(h.phase, stats.uniform(0, 2 * np.pi).cdf).pvalue > 1e-3


def test_fading_amplitude_rayleigh_scale():
    h = sample_fading(4.0, 20000, np.random.default_rng(2))
    # Rayleigh with E[a^2] = 4 has scale sqrt(2)
    assert stats.kstest(h.amplitude, stats.rayleigh(scale=math.sqrt(2)).cdf).pvalue > 1e-3


def test_fading_independent_across_symbols():
    g = sample_fading(1.0, 10**5, np.random.default_rng(3)).gains
    rho = np.vdot(g[:-1], g[1:]) / np.vdot(g, g)
    assert abs(rho) < 0.02


def test_fading_rejects_nonpositive_variance():
    with pytest.raises(ValueError):
        sample_fading(0.0, 3, np.random.default_rng())


def test_noiseless_superposition_same_tone():
    p = ChannelParams(M=2)
    x = SymbolFrame(np.array([0, 0, 0]), 2)
    r1, r2, rn = rngs(4)
    y = ma_phase(x, x, p, r1, r2, rn, noise=False)
    h1 = sample_fading(1.0, 3, np.random.default_rng([4, 0])).gains
    h2 = sample_fading(1.0, 3, np.random.default_rng([4, 1])).gains
    np.testing.assert_allclose(y[0], h1 + h2)
    np.testing.assert_array_equal(y[1], 0)


def test_noiseless_superposition_different_tones():
    p = ChannelParams(M=4)
    y = ma_phase(SymbolFrame(np.array([1]), 4), SymbolFrame(np.array([3]), 4), p, *rngs(5), noise=False)
    h1 = sample_fading(1.0, 1, np.random.default_rng([5, 0])).gains
    h2 = sample_fading(1.0, 1, np.random.default_rng([5, 1])).gains
    np.testing.assert_allclose(y[:, 0], [0, h1[0], 0, h2[0]])


@pytest.mark.parametrize("M", [2, 4])
def test_relay_energy_matches_sum(M):
    p = ChannelParams(N0=0.7, M=M)
    rng = np.random.default_rng(6)
    n = 200000
    x1 = SymbolFrame(rng.integers(0, M, n), M)
    x2 = SymbolFrame(rng.integers(0, M, n), M)
    y = ma_phase(x1, x2, p, *rngs(7))
    assert np.mean(np.sum(np.abs(y) ** 2, axis=0)) == pytest.approx(p.N0 * M + 2.0, rel=0.01)


@pytest.mark.parametrize("M", [2, 4, 8])
def test_scaled_relay_symbols_have_unit_energy(M):
    p = ChannelParams(N0=0.3, M=M)
    rng = np.random.default_rng(8)
    n = 10**5
    y = ma_phase(SymbolFrame(rng.integers(0, M, n), M), SymbolFrame(rng.integers(0, M, n), M), p, *rngs(9))
    xr = relay_scale_factor(p) * y
    assert np.mean(np.sum(np.abs(xr) ** 2, axis=0)) == pytest.approx(1.0, rel=0.01)


def test_end_node_second_moment_per_dimension():
    # E|y_m|^2 = beta^2 E_R sigma_m^2 + N0, sigma_m^2 from the four variance cases
    p = ChannelParams(N0=0.4, M=4, E1=1.0, E2=2.0, ER=1.5)
    n = 400000
    x1 = SymbolFrame(np.zeros(n, dtype=int), 4)
    x2 = SymbolFrame(np.ones(n, dtype=int), 4)
    y = two_way_relay(x1, x2, p, 10, 0)
    beta = relay_scale_factor(p)
    var = case_variances(p)
    expected = beta**2 * p.ER * np.array([var[1], var[2], var[0], var[0]]) + p.N0
    np.testing.assert_allclose(np.mean(np.abs(y) ** 2, axis=1), expected, rtol=0.02)


def test_noiseless_cascade_second_moment():
    p = ChannelParams(N0=0.2, M=2)
    n = 400000
    x = SymbolFrame(np.zeros(n, dtype=int), 2)
    y = two_way_relay(x, x, p, 11, 0, noiseless=True)
    beta = relay_scale_factor(p)
    assert np.all(y[1] == 0)
    assert np.mean(np.abs(y[0]) ** 2) == pytest.approx(beta**2 * p.ER * (p.E1 + p.E2), rel=0.02)


def test_weak_relay_link_leaves_noise():
    p = ChannelParams(N0=0.5, M=2, ER=1e-12)
    xr = np.ones((2, 100000), dtype=complex)
    y = bc_phase(xr, p, *rngs(12, 2))
    np.testing.assert_allclose(np.mean(np.abs(y) ** 2, axis=1), 0.5, rtol=0.02)


def test_dimension_mismatch_rejected():
    p = ChannelParams(M=4)
    with pytest.raises(ValueError):
        ma_phase(SymbolFrame(np.array([0]), 4), SymbolFrame(np.array([0, 1]), 4), p, *rngs(0))
    with pytest.raises(ValueError):
        bc_phase(np.zeros((2, 3)), p, *rngs(0, 2))


def test_streams_reproducible_and_distinct():
    a = stream_rng(1, 2, 3, stream="noise_r").standard_normal(5)
    b = stream_rng(1, 2, 3, stream="noise_r").standard_normal(5)
    c = stream_rng(1, 2, 3, stream="noise_1").standard_normal(5)
    d = stream_rng(1, 2, 4, stream="noise_r").standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c) and not np.allclose(a, d)
    with pytest.raises(ValueError):
        stream_rng(1, stream="bogus")


def test_two_way_relay_bit_exact_reproduction():
    p = ChannelParams(M=4, N0=0.3)
    x1 = SymbolFrame(np.array([0, 1, 2, 3]), 4)
    x2 = SymbolFrame(np.array([3, 2, 1, 0]), 4)
    np.testing.assert_array_equal(two_way_relay(x1, x2, p, 5, 1, 2), two_way_relay(x1, x2, p, 5, 1, 2))


def test_complex_gaussian_variance_split():
    z = complex_gaussian(3.0, 10**6, np.random.default_rng(13))
    assert np.var(z.real) == pytest.approx(1.5, rel=0.01)
    assert np.var(z.imag) == pytest.approx(1.5, rel=0.01)
