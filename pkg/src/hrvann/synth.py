"""Synthetic RR recordings and labeled cohorts with known ground truth."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .ingest import Cohort, RRSeries, SubjectRecord, format_rr, write_manifest

LF_HZ = 0.10
HF_HZ = 0.25
NOISE_GRID_HZ = 4.0


@dataclass(frozen=True)
class RrProfile:
    base_rr_ms: float = 850.0
    lf_amp_ms: float = 30.0
    hf_amp_ms: float = 20.0
    noise_sd_ms: float = 20.0
    noise_beta: float = -1.0  # noise PSD ~ f**noise_beta
    artifact_rate: float = 0.0
    duration_s: float = 86400.0

    def validate(self):
        if not 400 <= self.base_rr_ms <= 1500:
            raise ConfigError(f"base_rr_ms {self.base_rr_ms} outside [400, 1500]")
        for name in ("lf_amp_ms", "hf_amp_ms", "noise_sd_ms"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if not 0 <= self.artifact_rate <= 0.05:
            raise ConfigError(f"artifact_rate {self.artifact_rate} outside [0, 0.05]")
        if self.duration_s < 300:
            raise ConfigError(f"duration_s {self.duration_s} below 300")
        return self


@dataclass(frozen=True)
class SynthTruth:
    artifact_idx: np.ndarray
    lf_amp_ms: float
    hf_amp_ms: float
    clean_intervals_ms: np.ndarray


def shaped_noise(n: int, beta: float, rng, sd: float = 1.0) -> np.ndarray:
    """Gaussian-phase spectral synthesis with power ~ f**beta, scaled to ``sd``.

    Random phases and Rayleigh-distributed magnitudes around
    ``f**(beta/2)``; the DC bin is zeroed.
    """
    if n < 4:
        raise ValueError("need at least 4 samples")
    f = np.fft.rfftfreq(n)
    amp = np.zeros_like(f)
    amp[1:] = f[1:] ** (beta / 2.0)
    coef = amp * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    if n % 2 == 0:
        coef[-1] = coef[-1].real
    x = np.fft.irfft(coef, n)
    s = x.std()
    return x * (sd / s) if s > 0 else x


def gen_rr_series(profile: RrProfile, seed) -> tuple[RRSeries, SynthTruth]:
    """Integrate RR(t) = base + LF/HF sinusoids + shaped noise into beats.

    Beat ``i`` lasts RR evaluated at its own onset time; beats are emitted
    until the recording reaches ``duration_s``.  Artifacts are isolated
    single beats multiplied by 3 or 0.4.
    """
    profile.validate()
    rng = np.random.default_rng(seed)
    n_grid = int(np.ceil(profile.duration_s * NOISE_GRID_HZ)) + 8
    noise = np.zeros(n_grid)
    if profile.noise_sd_ms > 0:
        noise = shaped_noise(n_grid, profile.noise_beta, rng, profile.noise_sd_ms)
    base, lf, hf = profile.base_rr_ms, profile.lf_amp_ms, profile.hf_amp_ms
    w_lf, w_hf = 2 * math.pi * LF_HZ, 2 * math.pi * HF_HZ
    sin = math.sin
    noise = noise.tolist()
    floor = 0.3 * base
    out = []
    t = 0.0
    step = 1.0 / NOISE_GRID_HZ
    end = profile.duration_s
    while t < end:
        g = t / step
        i = int(g)
        frac = g - i
        nz = noise[i] * (1.0 - frac) + noise[i + 1] * frac
        rr = base + lf * sin(w_lf * t) + hf * sin(w_hf * t) + nz
        if rr < floor:
            rr = floor
        out.append(rr)
        t += rr / 1000.0
    clean = np.array(out)
    x = clean.copy()
    idx = np.array([], dtype=int)
    if profile.artifact_rate > 0 and x.size > 10:
        hit = rng.random(x.size) < profile.artifact_rate
        hit[:5] = False
        hit[-2:] = False
        # keep artifacts isolated: drop any hit directly after another hit
        hit[1:] &= ~hit[:-1]
        idx = np.flatnonzero(hit)
        factors = np.where(rng.random(idx.size) < 0.5, 3.0, 0.4)
        x[idx] = x[idx] * factors
    return RRSeries(x), SynthTruth(idx, lf, hf, clean)


@dataclass(frozen=True)
class AgeDist:
    mean: float
    sd: float


@dataclass(frozen=True)
class ClassSpec:
    profile: RrProfile
    p_male: float
    age_male: AgeDist
    age_female: AgeDist


def _default_normal():
    return ClassSpec(
        RrProfile(base_rr_ms=850.0, lf_amp_ms=30.0, hf_amp_ms=20.0, noise_sd_ms=25.0),
        p_male=316 / 681, age_male=AgeDist(62, 15), age_female=AgeDist(64, 15),
    )


def _default_ihd():
    return ClassSpec(
        RrProfile(base_rr_ms=840.0, lf_amp_ms=27.0, hf_amp_ms=18.0, noise_sd_ms=23.0),
        p_male=222 / 284, age_male=AgeDist(71, 10), age_female=AgeDist(76, 10),
    )


@dataclass(frozen=True)
class CohortSpec:
    n_normal: int = 681
    n_ihd: int = 284
    normal: ClassSpec = field(default_factory=_default_normal)
    ihd: ClassSpec = field(default_factory=_default_ihd)
    jitter: float = 0.25  # relative SD of per-subject profile perturbation
    master_seed: int = 0
    duration_s: float | None = None  # overrides both class profiles when set
    artifact_rate: float | None = None

    def validate(self):
        if self.n_normal <= 0 or self.n_ihd <= 0:
            raise ConfigError("class counts must be positive")
        if not 0 <= self.jitter < 1:
            raise ConfigError("jitter must lie in [0, 1)")
        for cs in (self.normal, self.ihd):
            if not 0 <= cs.p_male <= 1:
                raise ConfigError("p_male must lie in [0, 1]")
            self._profile(cs).validate()
        return self

    def _profile(self, cs: ClassSpec) -> RrProfile:
        p = cs.profile
        if self.duration_s is not None:
            p = replace(p, duration_s=self.duration_s)
        if self.artifact_rate is not None:
            p = replace(p, artifact_rate=self.artifact_rate)
        return p

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CohortSpec":
        d = dict(d)
        try:
            for key in ("normal", "ihd"):
                if key in d:
                    c = dict(d[key])
                    default = _default_normal() if key == "normal" else _default_ihd()
                    d[key] = ClassSpec(
                        profile=replace(default.profile, **c.get("profile", {})),
                        p_male=float(c.get("p_male", default.p_male)),
                        age_male=AgeDist(**c["age_male"]) if "age_male" in c else default.age_male,
                        age_female=AgeDist(**c["age_female"]) if "age_female" in c else default.age_female,
                    )
            return cls(**d).validate()
        except TypeError as exc:
            raise ConfigError(f"invalid cohort spec: {exc}") from None


def _jittered(profile: RrProfile, jitter: float, rng) -> RrProfile:
    def j(v):
        return max(0.0, v * (1.0 + jitter * rng.standard_normal()))

    return replace(
        profile,
        base_rr_ms=float(np.clip(j(profile.base_rr_ms), 400.0, 1500.0)),
        lf_amp_ms=j(profile.lf_amp_ms),
        hf_amp_ms=j(profile.hf_amp_ms),
        noise_sd_ms=j(profile.noise_sd_ms),
    )


def _subject_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), 7, int(index)])


def subject_plan(spec: CohortSpec):
    """Per-subject (id, label, profile, age, gender, series seed), deterministic in ``master_seed``."""
    spec.validate()
    plan = []
    labels = ["normal"] * spec.n_normal + ["ihd"] * spec.n_ihd
    for i, label in enumerate(labels):
        cs = spec.normal if label == "normal" else spec.ihd
        ss = _subject_seed(spec.master_seed, i)
        meta_seed, series_seed = ss.spawn(2)
        rng = np.random.default_rng(meta_seed)
        profile = _jittered(spec._profile(cs), spec.jitter, rng)
        gender = "male" if rng.random() < cs.p_male else "female"
        ad = cs.age_male if gender == "male" else cs.age_female
        age = int(np.clip(round(ad.mean + ad.sd * rng.standard_normal()), 18, 100))
        sid = f"S{i + 1:04d}"
        plan.append((sid, label, profile, age, gender, series_seed))
    return plan


def gen_cohort(spec: CohortSpec):
    """Build the cohort in memory; returns ``(Cohort, truth dict)``."""
    subjects, truth = [], {}
    for sid, label, profile, age, gender, sseed in subject_plan(spec):
        rr, gt = gen_rr_series(profile, sseed)
        subjects.append(SubjectRecord(sid, rr, age, gender, label))
        truth[sid] = _truth_entry(label, profile, gt)
    return Cohort(tuple(subjects)), truth


def _truth_entry(label, profile, gt: SynthTruth) -> dict:
    return {
        "label": label,
        "profile": asdict(profile),
        "artifact_idx": gt.artifact_idx.tolist(),
        "n_beats": int(gt.clean_intervals_ms.size),
    }


def write_cohort(spec: CohortSpec, out_dir) -> Path:
    """Write ``rr/<id>.txt``, ``manifest.csv`` and ``truth.json``; returns the manifest path."""
    out = Path(out_dir)
    (out / "rr").mkdir(parents=True, exist_ok=True)
    rows, truth = [], {}
    for sid, label, profile, age, gender, sseed in subject_plan(spec):
        rr, gt = gen_rr_series(profile, sseed)
        rel = f"rr/{sid}.txt"
        _atomic_write(out / rel, format_rr(rr.intervals_ms))
        rows.append({
            "subject_id": sid,
            "rr_path": rel,
            "age": age,
            "gender": "M" if gender == "male" else "F",
            "label": label.upper(),
        })
        truth[sid] = _truth_entry(label, profile, gt)
    manifest = out / "manifest.csv"
    tmp = manifest.with_suffix(".csv.tmp")
    write_manifest(tmp, rows)
    tmp.replace(manifest)
    _atomic_write(out / "truth.json", json.dumps({"spec": spec.to_dict(), "subjects": truth}, indent=1, sort_keys=True) + "\n")
    return manifest


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
