import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hrvann.errors import TooShortError
from hrvann.timedomain import compute_time_features


def brute_time_features(x):
    n = len(x)
    mean = sum(x) / n
    sdnn = math.sqrt(sum((v - mean) ** 2 for v in x) / (n - 1))
    diffs = [x[i + 1] - x[i] for i in range(n - 1)]
    rmssd = math.sqrt(sum(d * d for d in diffs) / (n - 1))
    nn50 = sum(1 for d in diffs if abs(d) > 50)
    return mean, sdnn, rmssd, nn50, 100.0 * nn50 / (n - 1)


def test_constant_series():
    f = compute_time_features([900.0] * 100)
    assert (f.mean_rr, f.sdnn, f.rmssd, f.nn50, f.pnn50) == (900.0, 0.0, 0.0, 0, 0.0)


def test_hand_example():
    f = compute_time_features([800, 850, 790, 860, 795])
    assert f.mean_rr == pytest.approx(819.0)
    assert f.sdnn == pytest.approx(math.sqrt(4420 / 4))  # 33.24
    assert f.rmssd == pytest.approx(math.sqrt(15225 / 4))  # 61.70
    assert f.nn50 == 3
    assert f.pnn50 == pytest.approx(75.0)


def test_fifty_is_not_counted():
    assert compute_time_features([800, 850, 800]).nn50 == 0
    assert compute_time_features([800, 850.001, 800]).nn50 == 2


def test_random_segment_matches_brute_force(rng):
    x = 800 + 60 * rng.standard_normal(350)
    got = compute_time_features(x)
    want = brute_time_features(list(x))
    np.testing.assert_allclose([got.mean_rr, got.sdnn, got.rmssd, got.nn50, got.pnn50], want, rtol=1e-9)


def test_too_short():
    with pytest.raises(TooShortError):
        compute_time_features([800])


segments = st.lists(st.floats(min_value=300, max_value=2000), min_size=2, max_size=60)


@given(segments, st.floats(min_value=-200, max_value=200))
def test_shift_invariance(x, c):
    a = compute_time_features(x)
    b = compute_time_features([v + c for v in x])
    assert b.mean_rr == pytest.approx(a.mean_rr + c, rel=1e-9, abs=1e-9)
    assert b.sdnn == pytest.approx(a.sdnn, rel=1e-6, abs=1e-6)
    assert b.rmssd == pytest.approx(a.rmssd, rel=1e-6, abs=1e-6)


@given(segments, st.floats(min_value=0.1, max_value=10))
def test_scale_covariance(x, k):
    a = compute_time_features(x)
    b = compute_time_features([v * k for v in x])
    assert b.mean_rr == pytest.approx(k * a.mean_rr, rel=1e-9)
    assert b.sdnn == pytest.approx(k * a.sdnn, rel=1e-9, abs=1e-9)
    assert b.rmssd == pytest.approx(k * a.rmssd, rel=1e-9, abs=1e-9)


@given(segments)
def test_invariants(x):
    f = compute_time_features(x)
    assert f.sdnn >= 0 and f.rmssd >= 0
    assert 0 <= f.pnn50 <= 100
    assert f.nn50 <= len(x) - 1
