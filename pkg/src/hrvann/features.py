"""Per-segment HRV extraction and per-subject 24 h averaging."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateSpectrumError, HrvError, MissingFeatureError, NoSegmentsError, TooShortError
from .ingest import SubjectRecord
from .nonlinear import higuchi_fd, poincare
from .preprocess import ArtifactRule, Segment, preprocess, write_clean_dump
from .spectral import HF_BAND, LF_BAND, band_powers, beta_exponent, periodogram_psd, write_psd_dump
from .timedomain import compute_time_features

HRV_NAMES = (
    "mean_rr", "sdnn", "rmssd", "nn50", "pnn50",
    "lf", "hf", "lf_hf", "lfn", "hfn",
    "sd1", "sd2", "sd1_sd2", "fd", "beta",
)
FEATURE_NAMES = HRV_NAMES + ("age", "gender")
SPECTRAL_NAMES = ("lf", "hf", "lf_hf", "lfn", "hfn", "beta")


@dataclass(frozen=True)
class FeatureParams:
    rule: ArtifactRule = field(default_factory=ArtifactRule)
    rate_hz: float = 2.0
    segment_s: float = 300.0
    max_artifact_fraction: float = 0.10
    k_max: int = 10
    lf_band: tuple = LF_BAND
    hf_band: tuple = HF_BAND
    beta_range: tuple = (0.0, 0.40)


def segment_features(seg: Segment, params: FeatureParams = FeatureParams()) -> dict:
    """The 15 HRV values of one segment; unavailable values are NaN."""
    out = dict.fromkeys(HRV_NAMES, math.nan)
    tf = compute_time_features(seg.rr_slice)
    out.update(mean_rr=tf.mean_rr, sdnn=tf.sdnn, rmssd=tf.rmssd, nn50=float(tf.nn50), pnn50=tf.pnn50)
    n_expected = int(round(params.segment_s * params.rate_hz))
    psd = periodogram_psd(seg.uniform_slice, params.rate_hz, n_expected)
    try:
        bp = band_powers(psd, params.lf_band, params.hf_band)
        out.update(lf=bp.lf, hf=bp.hf, lf_hf=bp.lf_hf, lfn=bp.lfn, hfn=bp.hfn)
        out["beta"] = beta_exponent(psd, params.beta_range)
    except DegenerateSpectrumError:
        pass
    if seg.rr_slice.size >= 3:
        pc = poincare(seg.rr_slice)
        out.update(sd1=pc.sd1, sd2=pc.sd2, sd1_sd2=pc.sd1_sd2)
    try:
        out["fd"] = higuchi_fd(seg.rr_slice, params.k_max).fd
    except TooShortError:
        pass
    return out


def average_subject_features(per_segment: Sequence[dict], age: float, gender: str | int) -> dict:
    """Mean of each HRV component over segments, skipping NaNs; appends age and gender.

    ``gender`` is encoded 1 for male, 0 for female.
    """
    if not per_segment:
        raise NoSegmentsError("no segments to average")
    out = {}
    for name in HRV_NAMES:
        vals = np.array([s.get(name, math.nan) for s in per_segment], dtype=float)
        ok = np.isfinite(vals)
        if not ok.any():
            raise MissingFeatureError(f"{name} is missing in every segment")
        out[name] = float(vals[ok].mean())
    out["age"] = float(age)
    out["gender"] = float(encode_gender(gender))
    return out


def encode_gender(gender) -> int:
    if gender in ("male", "M", 1):
        return 1
    if gender in ("female", "F", 0):
        return 0
    raise ValueError(f"unknown gender {gender!r}")


def extract_subject(record: SubjectRecord, params: FeatureParams = FeatureParams(), dump_dir=None) -> dict:
    """Run preprocessing and feature extraction for one subject."""
    clean, _, segments = preprocess(
        record.rr, params.rule, params.rate_hz, params.segment_s, params.max_artifact_fraction
    )
    per_segment = [segment_features(s, params) for s in segments]
    if dump_dir is not None:
        d = Path(dump_dir)
        d.mkdir(parents=True, exist_ok=True)
        write_clean_dump(d / f"{record.subject_id}_clean.csv", clean)
        n_expected = int(round(params.segment_s * params.rate_hz))
        psd = periodogram_psd(segments[0].uniform_slice, params.rate_hz, n_expected)
        write_psd_dump(d / f"{record.subject_id}_psd_seg0.csv", psd)
    return average_subject_features(per_segment, record.age, record.gender)


def _extract_one(args):
    record, params = args
    try:
        return record.subject_id, extract_subject(record, params), None
    except HrvError as exc:
        return record.subject_id, None, f"{type(exc).__name__}: {exc}"


def extract_cohort(records, params: FeatureParams = FeatureParams(), jobs: int = 1):
    """Features for every subject, in input order.

    Returns ``(rows, rejects)`` where ``rows`` is a list of
    ``(subject_id, label, feature dict)`` and ``rejects`` a list of
    ``(subject_id, reason)``.
    """
    records = list(records)
    work = [(r, params) for r in records]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, work, chunksize=4))
    else:
        results = [_extract_one(w) for w in work]
    labels = {r.subject_id: r.label for r in records}
    rows, rejects = [], []
    for sid, feats, err in results:
        if err is None:
            rows.append((sid, labels[sid], feats))
        else:
            rejects.append((sid, err))
    return rows, rejects


def write_feature_table(path, rows) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("subject_id",) + FEATURE_NAMES + ("label",))
        for sid, label, feats in rows:
            w.writerow([sid] + [repr(float(feats[n])) for n in FEATURE_NAMES] + [label])


def read_feature_table(path):
    """Inverse of :func:`write_feature_table`: ``(ids, X, labels)`` with labels 0/1 (1 = ihd)."""
    ids, data, labels = [], [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [n for n in FEATURE_NAMES + ("subject_id", "label") if n not in (reader.fieldnames or [])]
        if missing:
            raise HrvError(f"feature table missing columns: {', '.join(missing)}")
        for row in reader:
            ids.append(row["subject_id"])
            data.append([float(row[n]) for n in FEATURE_NAMES])
            labels.append(1 if row["label"].strip().lower() == "ihd" else 0)
    return ids, np.array(data, dtype=float).reshape(-1, len(FEATURE_NAMES)), np.array(labels, dtype=int)
