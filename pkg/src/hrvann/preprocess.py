"""Artifact screening, spline substitution, 2 Hz resampling and 300 s segmentation."""
from __future__ import annotations

import csv
import statistics
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    AllArtifactsError,
    InsufficientSupportError,
    NoSegmentsError,
    TooShortError,
)
from .ingest import RRSeries


@dataclass(frozen=True)
class ArtifactRule:
    """Range plus relative-deviation screen against recently accepted beats."""

    min_rr_ms: float = 300.0
    max_rr_ms: float = 2000.0
    rel_threshold: float = 0.20
    ref_beats: int = 5


@dataclass(frozen=True)
class CleanSeries:
    rr: RRSeries
    artifact_mask: np.ndarray
    artifact_fraction: float


@dataclass(frozen=True)
class UniformTachogram:
    samples: np.ndarray
    rate_hz: float = 2.0
    t0_s: float = 0.0

    @property
    def times_s(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.rate_hz


@dataclass(frozen=True)
class Segment:
    rr_slice: np.ndarray
    uniform_slice: np.ndarray
    start_s: float
    length_s: float
    artifact_fraction: float

    @property
    def window(self) -> tuple[float, float]:
        return (self.start_s, self.start_s + self.length_s)


def detect_artifacts(rr: RRSeries, rule: ArtifactRule = ArtifactRule()) -> np.ndarray:
    """Boolean mask, True where a beat fails the screen.

    A beat is rejected when it lies outside ``[min_rr_ms, max_rr_ms]`` or
    deviates from the median of the last ``ref_beats`` accepted beats by more
    than ``rel_threshold`` of that median.  Until the first beat is accepted
    the reference is the median of the first ``ref_beats`` in-range beats.
    """
    x = rr.intervals_ms
    if x.size < 5:
        raise TooShortError(f"artifact screening needs at least 5 beats, got {x.size}")
    in_range = (x >= rule.min_rr_ms) & (x <= rule.max_rr_ms)
    mask = ~in_range
    seed = x[in_range][: rule.ref_beats]
    if seed.size == 0:
        raise AllArtifactsError("no beat lies inside the physiological range")
    recent: deque = deque(maxlen=rule.ref_beats)
    seed_ref = float(np.median(seed))
    thr = rule.rel_threshold
    values = x.tolist()
    for i in np.flatnonzero(in_range).tolist():
        ref = statistics.median(recent) if recent else seed_ref
        v = values[i]
        if abs(v - ref) > thr * ref:
            mask[i] = True
        else:
            recent.append(v)
    if mask.all():
        raise AllArtifactsError("every beat was flagged as an artifact")
    return mask


def correct_artifacts(rr: RRSeries, mask) -> CleanSeries:
    """Replace flagged intervals by a natural cubic spline through the normal beats.

    The spline runs over (onset time, RR) pairs of unflagged beats; flagged
    intervals take the spline value at their own onset time.
    """
    mask = np.asarray(mask, dtype=bool)
    x = rr.intervals_ms
    if mask.shape != x.shape:
        raise ValueError(f"mask length {mask.size} != series length {x.size}")
    n_bad = int(mask.sum())
    if n_bad == 0:
        return CleanSeries(rr, mask.copy(), 0.0)
    good = ~mask
    if good.sum() < 4:
        raise InsufficientSupportError(f"only {int(good.sum())} normal beats; need 4")
    t = rr.beat_times_s
    spline = CubicSpline(t[good], x[good], bc_type="natural")
    fixed = x.copy()
    fixed[mask] = spline(t[mask])
    if np.any(fixed <= 0):
        raise InsufficientSupportError("spline substitution produced non-positive intervals")
    return CleanSeries(RRSeries(fixed), mask.copy(), n_bad / x.size)


def resample_uniform(clean: CleanSeries, rate_hz: float = 2.0, min_duration_s: float = 300.0) -> UniformTachogram:
    """Cubic-spline evaluation of RR(onset time) on a grid with step ``1/rate_hz``.

    The grid spans the whole recording, so samples after the last onset (at
    most one interval) come from the end polynomial piece.
    """
    rr = clean.rr
    duration = rr.duration_s
    if duration < min_duration_s:
        raise TooShortError(f"recording lasts {duration:.1f} s; need {min_duration_s:g} s")
    n = int(np.floor(duration * rate_hz + 1e-9)) + 1
    grid = np.arange(n) / rate_hz
    spline = CubicSpline(rr.beat_times_s, rr.intervals_ms, bc_type="natural")
    return UniformTachogram(spline(grid), rate_hz, 0.0)


def segment(
    clean: CleanSeries,
    uniform: UniformTachogram,
    length_s: float = 300.0,
    max_artifact_fraction: float = 0.10,
) -> list[Segment]:
    """Cut consecutive non-overlapping windows; drop the trailing partial one.

    Windows whose share of substituted beats exceeds ``max_artifact_fraction``
    are discarded.
    """
    return _windows(clean, uniform, length_s, max_artifact_fraction)[0]


def _windows(clean, uniform, length_s, max_artifact_fraction):
    duration = clean.rr.duration_s
    if duration < length_s:
        raise TooShortError(f"recording lasts {duration:.1f} s; need {length_s:g} s")
    per = int(round(length_s * uniform.rate_hz))
    n_win = int(np.floor(duration / length_s + 1e-9))
    n_win = min(n_win, uniform.samples.size // per)
    onsets = clean.rr.beat_times_s
    out, n_dropped = [], 0
    for k in range(n_win):
        start = uniform.t0_s + k * length_s
        lo, hi = np.searchsorted(onsets, [start, start + length_s], side="left")
        if hi - lo == 0:
            n_dropped += 1
            continue
        frac = float(clean.artifact_mask[lo:hi].mean())
        if frac > max_artifact_fraction:
            n_dropped += 1
            continue
        out.append(
            Segment(
                rr_slice=clean.rr.intervals_ms[lo:hi],
                uniform_slice=uniform.samples[k * per:(k + 1) * per],
                start_s=start,
                length_s=length_s,
                artifact_fraction=frac,
            )
        )
    if not out:
        raise NoSegmentsError(f"all {n_win} windows rejected by the quality filter")
    return out, n_win, n_dropped


def preprocess(rr: RRSeries, rule: ArtifactRule = ArtifactRule(), rate_hz: float = 2.0,
               length_s: float = 300.0, max_artifact_fraction: float = 0.10):
    """Screen, correct, resample and segment one recording.

    Returns ``(clean, uniform, segments)``.
    """
    if rr.duration_s < length_s:
        raise TooShortError(f"recording lasts {rr.duration_s:.1f} s; need {length_s:g} s")
    mask = detect_artifacts(rr, rule)
    clean = correct_artifacts(rr, mask)
    uniform = resample_uniform(clean, rate_hz, min_duration_s=length_s)
    return clean, uniform, segment(clean, uniform, length_s, max_artifact_fraction)


def write_clean_dump(path, clean: CleanSeries) -> None:
    """Debug table: beat_index, t_s, rr_ms, is_artifact."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beat_index", "t_s", "rr_ms", "is_artifact"])
        for i, (t, v, a) in enumerate(zip(clean.rr.beat_times_s, clean.rr.intervals_ms, clean.artifact_mask)):
            w.writerow([i, f"{t:.6f}", f"{v:.6f}", int(a)])
