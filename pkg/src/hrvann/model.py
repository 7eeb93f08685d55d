"""Reloadable trained pipeline: feature parameters, input scheme, input scaling, network."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .features import FEATURE_NAMES, FeatureParams, extract_subject
from .ingest import RRSeries, SubjectRecord
from .network import Network, predict
from .preprocess import ArtifactRule
from .selection import ColumnStats, InputScheme

MODEL_FORMAT = "hrvann-model"
MODEL_VERSION = 1


@dataclass
class ModelBundle:
    params: FeatureParams
    scheme: InputScheme
    input_stats: ColumnStats
    network: Network
    meta: dict

    def to_dict(self) -> dict:
        p = asdict(self.params)
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "feature_names": list(FEATURE_NAMES),
            "feature_params": {**p, "lf_band": list(p["lf_band"]), "hf_band": list(p["hf_band"]),
                               "beta_range": list(p["beta_range"])},
            "scheme": self.scheme.to_dict(),
            "input_stats": self.input_stats.to_dict(),
            "network": self.network.to_dict(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelBundle":
        if d.get("format") != MODEL_FORMAT:
            raise ModelFormatError(f"not a model file (format {d.get('format')!r})")
        if d.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"model version {d.get('version')!r} unsupported (expected {MODEL_VERSION})")
        if tuple(d.get("feature_names", ())) != FEATURE_NAMES:
            raise ModelFormatError("model was trained on a different feature set")
        fp = dict(d["feature_params"])
        rule = ArtifactRule(**fp.pop("rule"))
        params = FeatureParams(rule=rule, **{k: tuple(v) if isinstance(v, list) else v for k, v in fp.items()})
        scheme = InputScheme.from_dict(d["scheme"])
        net = Network.from_dict(d["network"])
        if net.n_in != scheme.dimension:
            raise ModelFormatError(f"network expects {net.n_in} inputs but scheme yields {scheme.dimension}")
        return cls(params, scheme, ColumnStats.from_dict(d["input_stats"]), net, dict(d.get("meta", {})))

    def save(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        tmp.replace(path)

    @classmethod
    def load(cls, path) -> "ModelBundle":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"cannot read model {path}: {exc}") from None
        try:
            return cls.from_dict(data)
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model {path}: {exc}") from None

    def inputs(self, feature_rows) -> np.ndarray:
        return self.input_stats.apply(self.scheme.transform(feature_rows))

    def predict_features(self, feature_rows):
        return predict(self.network, self.inputs(feature_rows))

    def predict_rr(self, rr: RRSeries, age: int, gender: str):
        """Full path from an RR recording to ``(class, y_ihd)``."""
        feats = extract_subject(SubjectRecord("input", rr, age, gender, "normal"), self.params)
        row = np.array([[feats[n] for n in FEATURE_NAMES]])
        cls, score = self.predict_features(row)
        return int(cls[0]), float(score[0])
