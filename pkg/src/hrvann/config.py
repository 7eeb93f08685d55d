"""Pipeline configuration: one YAML/JSON file, command-line overrides, effective-config dump."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .errors import ConfigError
from .evaluation import ExperimentConfig
from .features import FeatureParams
from .network import TrainConfig
from .preprocess import ArtifactRule
from .selection import SCHEME_KINDS


@dataclass(frozen=True)
class PreprocessSection:
    min_rr_ms: float = 300.0
    max_rr_ms: float = 2000.0
    rel_threshold: float = 0.20
    ref_beats: int = 5
    rate_hz: float = 2.0
    segment_s: float = 300.0
    max_artifact_fraction: float = 0.10


@dataclass(frozen=True)
class FeatureSection:
    k_max: int = 10
    lf_band: tuple = (0.04, 0.15)
    hf_band: tuple = (0.15, 0.40)
    beta_range: tuple = (0.0, 0.40)


@dataclass(frozen=True)
class SelectionSection:
    pca_variance: float = 0.90
    p_enter: float = 0.05
    p_remove: float = 0.10
    per_split: bool = False


@dataclass(frozen=True)
class TrainSection:
    learning_rate: float = 0.1
    momentum: float = 0.9
    max_epochs: int = 1000
    target_mse: float = 1e-3
    batch_size: int | None = None


@dataclass(frozen=True)
class PipelineConfig:
    manifest: str | None = None
    out_dir: str = "out"
    features_table: str | None = None
    preprocess: PreprocessSection = field(default_factory=PreprocessSection)
    features: FeatureSection = field(default_factory=FeatureSection)
    selection: SelectionSection = field(default_factory=SelectionSection)
    train: TrainSection = field(default_factory=TrainSection)
    schemes: tuple = ("pca", "stepwise", "all")
    hidden_sizes: tuple = (2, 3, 4, 5, 6)
    repetitions: int = 100
    train_fraction: float = 0.75
    stratified: bool = True
    master_seed: int = 0

    def validate(self) -> "PipelineConfig":
        for s in self.schemes:
            if s not in SCHEME_KINDS:
                raise ConfigError(f"unknown scheme {s!r}; expected one of {', '.join(SCHEME_KINDS)}")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for h in self.hidden_sizes:
            if not 2 <= int(h) <= 6:
                raise ConfigError(f"hidden size {h} outside [2, 6]")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be positive")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        self.train_config(0)
        return self

    def feature_params(self) -> FeatureParams:
        p, f = self.preprocess, self.features
        return FeatureParams(
            rule=ArtifactRule(p.min_rr_ms, p.max_rr_ms, p.rel_threshold, p.ref_beats),
            rate_hz=p.rate_hz,
            segment_s=p.segment_s,
            max_artifact_fraction=p.max_artifact_fraction,
            k_max=f.k_max,
            lf_band=tuple(f.lf_band),
            hf_band=tuple(f.hf_band),
            beta_range=tuple(f.beta_range),
        )

    def train_config(self, seed: int) -> TrainConfig:
        t = self.train
        return TrainConfig(t.learning_rate, t.momentum, t.max_epochs, t.target_mse, seed, t.batch_size)

    def experiment_config(self) -> ExperimentConfig:
        s = self.selection
        return ExperimentConfig(
            schemes=tuple(self.schemes),
            hidden_sizes=tuple(int(h) for h in self.hidden_sizes),
            repetitions=int(self.repetitions),
            master_seed=int(self.master_seed),
            train_fraction=float(self.train_fraction),
            stratified=bool(self.stratified),
            per_split_schemes=bool(s.per_split),
            pca_variance=float(s.pca_variance),
            p_enter=float(s.p_enter),
            p_remove=float(s.p_remove),
            train=self.train_config(int(self.master_seed)),
        )

    def to_dict(self) -> dict:
        return _plain(asdict(self))


_SECTIONS = {
    "preprocess": PreprocessSection,
    "features": FeatureSection,
    "selection": SelectionSection,
    "train": TrainSection,
}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _build(cls, data: dict, where: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    kw = {}
    for k, v in data.items():
        if k in _SECTIONS and cls is PipelineConfig:
            kw[k] = _build(_SECTIONS[k], v or {}, k)
        elif isinstance(v, list):
            kw[k] = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        else:
            kw[k] = v
    return cls(**kw)


def config_from_dict(data: dict | None) -> PipelineConfig:
    return _build(PipelineConfig, dict(data or {}), "config").validate()


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig().validate()
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping")
    return config_from_dict(data)


def with_overrides(cfg: PipelineConfig, **overrides) -> PipelineConfig:
    kw = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **kw).validate() if kw else cfg


def write_config(path, cfg: PipelineConfig) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
