"""Reading RR listings and cohort manifests.

RR files are UTF-8 text with one interval (milliseconds) per line; blank
lines and ``#`` comments are ignored.  The manifest is a comma-separated
table with the header ``subject_id,rr_path,age,gender,label``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IoError, ParseError, RangeError, SchemaError, TooShortError

MAX_RR_MS = 5000.0

GENDER_TOKENS = {"M": "male", "F": "female"}
LABEL_TOKENS = {"NORMAL": "normal", "IHD": "ihd"}
MANIFEST_COLUMNS = ("subject_id", "rr_path", "age", "gender", "label")


@dataclass(frozen=True)
class RRSeries:
    """Ordered RR intervals with the onset time of each interval.

    ``beat_times_s[i]`` is the onset of ``intervals_ms[i]``; the recording
    ends at ``duration_s``.
    """

    intervals_ms: np.ndarray
    beat_times_s: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.intervals_ms, dtype=float)
        if x.ndim != 1:
            raise ValueError("intervals must be one-dimensional")
        if x.size < 2:
            raise TooShortError(f"need at least 2 intervals, got {x.size}")
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            raise RangeError("intervals must be finite and positive")
        x.setflags(write=False)
        t = np.concatenate(([0.0], np.cumsum(x[:-1]) / 1000.0))
        t.setflags(write=False)
        object.__setattr__(self, "intervals_ms", x)
        object.__setattr__(self, "beat_times_s", t)

    def __len__(self):
        return self.intervals_ms.size

    @property
    def duration_s(self) -> float:
        return float(self.intervals_ms.sum() / 1000.0)


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    rr: RRSeries
    age: int
    gender: str  # "male" | "female"
    label: str  # "normal" | "ihd"

    def __post_init__(self):
        if self.gender not in ("male", "female"):
            raise SchemaError(f"{self.subject_id}: bad gender {self.gender!r}")
        if self.label not in ("normal", "ihd"):
            raise SchemaError(f"{self.subject_id}: bad label {self.label!r}")
        if not 0 <= self.age <= 130:
            raise SchemaError(f"{self.subject_id}: age {self.age} outside [0, 130]")


@dataclass(frozen=True)
class Cohort:
    subjects: tuple

    def __post_init__(self):
        subjects = tuple(self.subjects)
        if not subjects:
            raise SchemaError("cohort is empty")
        seen = set()
        for s in subjects:
            if s.subject_id in seen:
                raise SchemaError(f"duplicate subject_id {s.subject_id!r}")
            seen.add(s.subject_id)
        object.__setattr__(self, "subjects", subjects)

    def __len__(self):
        return len(self.subjects)

    def __iter__(self):
        return iter(self.subjects)

    def class_counts(self) -> dict:
        counts = {"normal": 0, "ihd": 0}
        for s in self.subjects:
            counts[s.label] += 1
        return counts


def parse_rr_file(text: str) -> RRSeries:
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(f"not a number: {line!r}", lineno) from None
        if not np.isfinite(v):
            raise ParseError(f"not a finite number: {line!r}", lineno)
        if v <= 0 or v > MAX_RR_MS:
            raise RangeError(f"RR interval {v} ms outside (0, {MAX_RR_MS:g}]", lineno)
        values.append(v)
    if len(values) < 2:
        raise TooShortError(f"need at least 2 intervals, got {len(values)}")
    return RRSeries(np.asarray(values))


def format_rr(intervals_ms: Iterable[float]) -> str:
    """Serialize intervals so that :func:`parse_rr_file` reads them back exactly."""
    return "".join(f"{float(v)!r}\n" for v in intervals_ms)


def read_rr_file(path) -> RRSeries:
    return parse_rr_file(Path(path).read_text(encoding="utf-8"))


def _parse_row(row: dict, base: Path, lineno: int) -> SubjectRecord:
    sid = (row.get("subject_id") or "").strip()
    if not sid:
        raise SchemaError(f"manifest line {lineno}: empty subject_id")
    gender = GENDER_TOKENS.get((row.get("gender") or "").strip().upper())
    if gender is None:
        raise SchemaError(f"{sid}: unknown gender token {row.get('gender')!r}")
    label = LABEL_TOKENS.get((row.get("label") or "").strip().upper())
    if label is None:
        raise SchemaError(f"{sid}: unknown label token {row.get('label')!r}")
    try:
        age = int((row.get("age") or "").strip())
    except ValueError:
        raise SchemaError(f"{sid}: age is not an integer: {row.get('age')!r}") from None
    rr_path = Path((row.get("rr_path") or "").strip())
    if not rr_path.is_absolute():
        rr_path = base / rr_path
    try:
        text = rr_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(sid, f"cannot read {rr_path}: {exc.strerror or exc}") from None
    try:
        rr = parse_rr_file(text)
    except (ParseError, TooShortError) as exc:
        raise type(exc)(f"{sid}: {exc}") from None
    return SubjectRecord(sid, rr, age, gender, label)


def read_manifest(path) -> list[dict]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in MANIFEST_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise SchemaError(f"manifest missing columns: {', '.join(missing)}")
            return list(reader)
    except OSError as exc:
        raise IoError("<manifest>", f"cannot read {path}: {exc.strerror or exc}") from None


def load_cohort(manifest) -> Cohort:
    """Parse every subject listed in ``manifest``; fails on the first bad entry."""
    manifest = Path(manifest)
    rows = read_manifest(manifest)
    subjects = [_parse_row(row, manifest.parent, i) for i, row in enumerate(rows, start=2)]
    return Cohort(tuple(subjects))


def load_cohort_lenient(manifest) -> tuple[list[SubjectRecord], list[tuple[str, str]]]:
    """Like :func:`load_cohort` but collects per-subject failures instead of raising."""
    manifest = Path(manifest)
    rows = read_manifest(manifest)
    good, rejects, seen = [], [], set()
    for i, row in enumerate(rows, start=2):
        sid = (row.get("subject_id") or "").strip() or f"<line {i}>"
        if sid in seen:
            raise SchemaError(f"duplicate subject_id {sid!r}")
        seen.add(sid)
        try:
            good.append(_parse_row(row, manifest.parent, i))
        except (ParseError, TooShortError, IoError) as exc:
            rejects.append((sid, f"{type(exc).__name__}: {exc}"))
    return good, rejects


def write_manifest(path, records: Sequence[dict]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow({k: r[k] for k in MANIFEST_COLUMNS})
