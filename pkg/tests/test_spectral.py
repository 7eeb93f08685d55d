import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hrvann.errors import DegenerateSpectrumError, ShapeError
from hrvann.spectral import Psd, band_powers, beta_exponent, periodogram_psd
from hrvann.synth import shaped_noise

T = np.arange(600) / 2.0


def dft_periodogram(x, fs=2.0):
    """Direct O(N^2) DFT oracle for the one-sided Hamming periodogram."""
    n = len(x)
    w = [0.54 - 0.46 * math.cos(2 * math.pi * i / (n - 1)) for i in range(n)]
    m = sum(x) / n
    xw = [(x[i] - m) * w[i] for i in range(n)]
    s2 = sum(v * v for v in w)
    idx = np.arange(n)
    out = []
    for k in range(n // 2 + 1):
        c = np.sum(np.array(xw) * np.exp(-2j * np.pi * k * idx / n))
        p = abs(c) ** 2 / (fs * s2)
        if 0 < k < n / 2:
            p *= 2
        out.append(p)
    return np.array(out)


def windowed_variance(x):
    w = np.hamming(len(x))
    d = (np.asarray(x) - np.mean(x)) * w
    return np.sum(d * d) / np.sum(w * w)


def test_grid_and_dft_oracle(rng):
    x = 800 + 30 * rng.standard_normal(600)
    psd = periodogram_psd(x)
    assert psd.freqs_hz.size == 301
    assert psd.df == pytest.approx(1 / 300)
    assert psd.freqs_hz[-1] == pytest.approx(1.0)
    np.testing.assert_allclose(psd.power, dft_periodogram(list(x)), rtol=1e-9, atol=1e-9)


def test_sinusoid_peak_and_power():
    psd = periodogram_psd(800 + 50 * np.sin(2 * np.pi * 0.1 * T))
    assert psd.freqs_hz[np.argmax(psd.power)] == pytest.approx(0.1)
    total = np.sum(psd.power) * psd.df
    assert total == pytest.approx(50 ** 2 / 2, rel=0.05)


def test_constant_input_is_flat_zero():
    psd = periodogram_psd(np.full(600, 812.5))
    assert np.allclose(psd.power, 0.0, atol=1e-20)
    with pytest.raises(DegenerateSpectrumError):
        band_powers(psd)
    with pytest.raises(DegenerateSpectrumError):
        beta_exponent(psd)


def test_white_noise_total_power():
    x = np.random.default_rng(7).normal(0, 30, 600)
    psd = periodogram_psd(x)
    assert np.sum(psd.power) * psd.df == pytest.approx(900, rel=0.10)


def test_wrong_length():
    with pytest.raises(ShapeError):
        periodogram_psd(np.zeros(599))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 600, elements=st.floats(-1e4, 1e4)))
def test_parseval_property(x):
    psd = periodogram_psd(x)
    assert np.all(psd.power >= 0)
    np.testing.assert_allclose(np.sum(psd.power) * psd.df, windowed_variance(x), rtol=1e-9, atol=1e-6)


def test_lf_sinusoid():
    x = 800 + 50 * np.sin(2 * np.pi * 0.10 * T) + 0.1 * np.random.default_rng(1).standard_normal(600)
    assert band_powers(periodogram_psd(x)).lfn > 0.95


def test_hf_sinusoid():
    x = 800 + 50 * np.sin(2 * np.pi * 0.25 * T) + 0.1 * np.random.default_rng(1).standard_normal(600)
    assert band_powers(periodogram_psd(x)).hfn > 0.95


def test_equal_two_tone():
    x = 800 + 40 * np.sin(2 * np.pi * 0.10 * T) + 40 * np.sin(2 * np.pi * 0.25 * T)
    bp = band_powers(periodogram_psd(x))
    assert bp.lfn == pytest.approx(0.5, abs=0.02)
    assert bp.hfn == pytest.approx(0.5, abs=0.02)
    assert bp.lf_hf == pytest.approx(1.0, abs=0.05)


def test_band_edges():
    f = np.arange(301) / 300
    p = np.zeros(301)
    p[[11, 12, 44, 45, 120, 121]] = 1.0  # 0.0367, 0.04, 0.1467, 0.15, 0.40, 0.4033 Hz
    bp = band_powers(Psd(f, p))
    df = 1 / 300
    assert bp.lf == pytest.approx(2 * df)  # 0.04 and 0.1467
    assert bp.hf == pytest.approx(2 * df)  # 0.15 and 0.40


@given(st.integers(0, 10_000), st.floats(0.01, 100))
@settings(max_examples=30, deadline=None)
def test_amplitude_scaling(seed, k):
    x = np.random.default_rng(seed).normal(0, 20, 600)
    a = band_powers(periodogram_psd(x))
    b = band_powers(periodogram_psd(k * x))
    assert b.lf == pytest.approx(k * k * a.lf, rel=1e-9)
    assert b.hf == pytest.approx(k * k * a.hf, rel=1e-9)
    assert b.lfn == pytest.approx(a.lfn, rel=1e-9)
    assert b.lfn + b.hfn == pytest.approx(1.0, rel=1e-12)
    assert b.lf_hf == pytest.approx(a.lf_hf, rel=1e-9)


def _mean_beta(gen, n=50):
    return np.mean([beta_exponent(periodogram_psd(gen(s))) for s in range(n)])


def test_beta_white_noise():
    assert _mean_beta(lambda s: np.random.default_rng(s).normal(0, 30, 600)) == pytest.approx(0.0, abs=0.3)


def test_beta_pink_noise():
    b = _mean_beta(lambda s: shaped_noise(600, -1.0, np.random.default_rng(s), 30))
    assert b == pytest.approx(-1.0, abs=0.3)


def test_beta_scale_invariant(rng):
    x = rng.normal(0, 30, 600)
    assert beta_exponent(periodogram_psd(2 * x)) == pytest.approx(beta_exponent(periodogram_psd(x)), abs=1e-9)


def test_beta_matches_polyfit(rng):
    psd = periodogram_psd(rng.normal(0, 30, 600))
    sel = (psd.freqs_hz > 0) & (psd.freqs_hz <= 0.4 + 1e-12)
    slope = np.polyfit(np.log(psd.freqs_hz[sel]), np.log(psd.power[sel]), 1)[0]
    assert beta_exponent(psd) == pytest.approx(slope, rel=1e-9)
