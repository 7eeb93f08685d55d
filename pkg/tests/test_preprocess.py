import math

import numpy as np
import pytest

from hrvann.errors import AllArtifactsError, InsufficientSupportError, NoSegmentsError, TooShortError
from hrvann.ingest import RRSeries
from hrvann.preprocess import (
    ArtifactRule,
    CleanSeries,
    correct_artifacts,
    detect_artifacts,
    preprocess,
    resample_uniform,
    segment,
)
from hrvann.synth import RrProfile, gen_rr_series

from conftest import rr_from_function


def _clean(rr):
    return CleanSeries(rr, np.zeros(len(rr), bool), 0.0)


def test_physiological_series_has_no_artifacts():
    assert not detect_artifacts(RRSeries([800, 805, 795, 802, 801])).any()


def test_spike_is_flagged():
    mask = detect_artifacts(RRSeries([800, 805, 2400, 802, 801]))
    assert mask.tolist() == [False, False, True, False, False]


def test_ratio_rule_inside_range():
    # 1100 is inside [300, 2000] but 37 % above the running median of ~800
    mask = detect_artifacts(RRSeries([800, 805, 795, 1100, 802, 801]))
    assert mask.tolist() == [False, False, False, True, False, False]
    # 900 deviates by 12.5 %: accepted
    assert not detect_artifacts(RRSeries([800, 805, 795, 900, 802, 801])).any()


def test_rule_is_configurable():
    rr = RRSeries([800, 805, 795, 900, 802, 801])
    assert detect_artifacts(rr, ArtifactRule(rel_threshold=0.10))[3]


def test_all_flagged():
    with pytest.raises(AllArtifactsError):
        detect_artifacts(RRSeries([100, 120, 110, 130, 2500]))


def test_detect_needs_five_beats():
    with pytest.raises(TooShortError):
        detect_artifacts(RRSeries([800, 805, 795, 802]))


def test_injected_spike_recall():
    rr, truth = gen_rr_series(RrProfile(artifact_rate=0.03, duration_s=3600), seed=11)
    mask = detect_artifacts(rr)
    hit = mask[truth.artifact_idx]
    assert hit.mean() >= 0.95


def test_correction_identity_without_flags():
    rr = RRSeries([800, 805, 795, 802, 801])
    c = correct_artifacts(rr, np.zeros(5, bool))
    np.testing.assert_array_equal(c.rr.intervals_ms, rr.intervals_ms)
    assert c.artifact_fraction == 0.0


def test_correction_constant_support():
    rr = RRSeries([800, 800, 2400, 800, 800])
    c = correct_artifacts(rr, np.array([0, 0, 1, 0, 0], bool))
    assert c.rr.intervals_ms[2] == pytest.approx(800, abs=1e-6)
    assert c.artifact_fraction == pytest.approx(0.2)


def test_correction_reproduces_linear_trend():
    # RR linear in onset time (700 ms at t=0, +4 ms/s); the flagged beat keeps its
    # value so later onsets stay on the line, and the spline must rebuild it
    rr = rr_from_function(lambda t: 700.0 + 4.0 * t, 40.0)
    k = len(rr) // 2
    mask = np.zeros(len(rr), bool)
    mask[k] = True
    c = correct_artifacts(rr, mask)
    assert c.rr.intervals_ms[k] == pytest.approx(700.0 + 4.0 * rr.beat_times_s[k], abs=1e-6)
    np.testing.assert_array_equal(np.delete(c.rr.intervals_ms, k), np.delete(rr.intervals_ms, k))


def test_correction_needs_support():
    with pytest.raises(InsufficientSupportError):
        correct_artifacts(RRSeries([800, 800, 2400, 2400, 800, 800]), np.array([0, 0, 1, 1, 1, 0], bool))


def test_correction_idempotent():
    rr, _ = gen_rr_series(RrProfile(artifact_rate=0.03, duration_s=900), seed=2)
    c1 = correct_artifacts(rr, detect_artifacts(rr))
    c2 = correct_artifacts(c1.rr, np.zeros(len(c1.rr), bool))
    np.testing.assert_array_equal(c1.rr.intervals_ms, c2.rr.intervals_ms)


def test_resample_constant_is_exact():
    rr = RRSeries(np.full(600, 1000.0))
    u = resample_uniform(_clean(rr))
    assert u.rate_hz == 2.0
    assert u.samples.size == math.floor(600 * 2) + 1
    assert np.all(u.samples == 1000.0)
    np.testing.assert_allclose(np.diff(u.times_s), 0.5)


def test_resample_tracks_sinusoid():
    f = lambda t: 800 + 50 * math.sin(2 * math.pi * 0.1 * t)  # noqa: E731
    rr = rr_from_function(f, 900)
    u = resample_uniform(_clean(rr))
    inside = u.times_s <= rr.beat_times_s[-1]
    want = np.array([f(t) for t in u.times_s[inside]])
    rms = np.sqrt(np.mean((u.samples[inside] - want) ** 2))
    assert rms < 2.0


def test_resample_too_short():
    with pytest.raises(TooShortError):
        resample_uniform(_clean(RRSeries(np.full(250, 800.0))))


def test_day_long_recording_has_288_windows():
    rr = rr_from_function(lambda t: 800.0 + 40 * math.sin(2 * math.pi * 0.1 * t), 86_400)
    clean = _clean(rr)
    segs = segment(clean, resample_uniform(clean))
    assert len(segs) == 86_400 // 300
    assert all(s.uniform_slice.size == 600 for s in segs)
    starts = [s.start_s for s in segs]
    assert starts == [300.0 * k for k in range(288)]


def test_trailing_partial_window_dropped():
    rr = RRSeries(np.full(750, 1000.0))
    clean = _clean(rr)
    segs = segment(clean, resample_uniform(clean))
    assert len(segs) == 2
    assert segs[1].window == (300.0, 600.0)
    assert segs[0].rr_slice.size == 300


def test_noisy_window_excluded():
    rr = RRSeries(np.full(900, 1000.0))
    mask = np.zeros(900, bool)
    mask[300:600:5] = True  # 20 % of the second window
    clean = CleanSeries(rr, mask, mask.mean())
    segs = segment(clean, resample_uniform(clean))
    assert [s.start_s for s in segs] == [0.0, 600.0]


def test_all_windows_rejected():
    rr = RRSeries(np.full(600, 1000.0))
    mask = np.zeros(600, bool)
    mask[::2] = True
    with pytest.raises(NoSegmentsError):
        segment(CleanSeries(rr, mask, 0.5), resample_uniform(_clean(rr)))


def test_segment_count_tiles_duration():
    rr, _ = gen_rr_series(RrProfile(duration_s=3000, artifact_rate=0.02), seed=4)
    _, uniform, segs = preprocess(rr)
    assert len(segs) <= math.floor(rr.duration_s / 300)
    for s in segs:
        assert s.uniform_slice.size == 600 and s.artifact_fraction <= 0.10
        lo, hi = s.window
        assert hi - lo == 300
