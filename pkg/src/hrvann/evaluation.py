"""Repeated 75/25 split protocol, confusion metrics, ROC/AUC and summaries."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegenerateLabelsError,
    DivergenceError,
    ExperimentError,
    ShapeError,
)
from .network import TrainConfig, init_network, one_hot, predict, train
from .selection import InputScheme, fit_scheme, standardize

log = logging.getLogger(__name__)

INDICES = ("sen", "spe", "pre", "acc", "auc")
HIST_EDGES = np.linspace(0.0, 100.0, 21)


@dataclass(frozen=True)
class SplitPlan:
    train_idx: np.ndarray
    test_idx: np.ndarray
    seed: int


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int
    sen: float
    spe: float
    pre: float
    acc: float


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float


@dataclass
class Repetition:
    scheme: str
    hidden: int
    rep: int
    seed: int
    metrics: Metrics | None
    auc: float
    roc: RocCurve | None = None
    network: object = None
    input_stats: object = None
    scheme_obj: InputScheme | None = None
    diverged: bool = False
    epochs: int = 0


@dataclass
class RunReport:
    repetitions: int
    results: list = field(default_factory=list)  # Repetition, ordered by (scheme, hidden, rep)
    schemes: dict = field(default_factory=dict)  # kind -> InputScheme (cohort-level)

    def configs(self):
        seen = []
        for r in self.results:
            key = (r.scheme, r.hidden)
            if key not in seen:
                seen.append(key)
        return seen

    def runs(self, scheme, hidden):
        return [r for r in self.results if r.scheme == scheme and r.hidden == hidden and not r.diverged]

    def best(self, scheme):
        """Highest test accuracy for a scheme over all hidden sizes; earliest wins ties."""
        cands = [r for r in self.results if r.scheme == scheme and not r.diverged]
        if not cands:
            return None
        return max(cands, key=lambda r: (r.metrics.acc, -r.hidden, -r.rep))


def split(labels, fraction: float = 0.75, seed=0, stratified: bool = True) -> SplitPlan:
    """Random train/test partition; per class when ``stratified``.

    The total training size is ``round(fraction * n)``; with stratification
    the per-class shares are allocated by largest remainder.
    """
    labels = np.asarray(labels, dtype=int)
    n = labels.size
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2 or counts.min() < 4:
        raise ConfigError(f"each class needs at least 4 subjects, got counts {dict(zip(classes.tolist(), counts.tolist()))}")
    if not 0 < fraction < 1:
        raise ConfigError("fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    n_train = int(math.floor(fraction * n + 0.5))
    if not stratified:
        perm = rng.permutation(n)
        return SplitPlan(np.sort(perm[:n_train]), np.sort(perm[n_train:]), int(seed))
    exact = fraction * counts
    alloc = np.floor(exact).astype(int)
    short = n_train - alloc.sum()
    order = np.lexsort((classes, -(exact - alloc)))
    alloc[order[:short]] += 1
    train_idx, test_idx = [], []
    for c, k in zip(classes, alloc):
        members = np.flatnonzero(labels == c)
        perm = rng.permutation(members)
        train_idx.append(perm[:k])
        test_idx.append(perm[k:])
    return SplitPlan(np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(test_idx)), int(seed))


def confusion_metrics(predictions, labels) -> Metrics:
    """Percent SEN/SPE/PRE/ACC with ihd (1) as the positive class; NaN for 0/0."""
    p = np.asarray(predictions, dtype=int)
    y = np.asarray(labels, dtype=int)
    if p.shape != y.shape:
        raise ShapeError(f"{p.size} predictions for {y.size} labels")
    if y.size == 0:
        raise ShapeError("no predictions")
    tp = int(np.sum((p == 1) & (y == 1)))
    fp = int(np.sum((p == 1) & (y == 0)))
    fn = int(np.sum((p == 0) & (y == 1)))
    tn = int(np.sum((p == 0) & (y == 0)))

    def pct(a, b):
        return 100.0 * a / b if b else math.nan

    return Metrics(tp, fp, fn, tn, pct(tp, tp + fn), pct(tn, tn + fp), pct(tp, tp + fp), pct(tp + tn, y.size))


def roc(scores, labels) -> RocCurve:
    """Threshold sweep over the distinct scores (positive when score >= threshold)."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    if s.shape != y.shape:
        raise ShapeError(f"{s.size} scores for {y.size} labels")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("ROC needs both classes")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(fpr, tpr, np.r_[np.inf, s[last]], auc)


def _seed(*key) -> int:
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, dtype=np.uint64)[0])


def split_seed(master_seed: int, rep: int) -> int:
    return _seed(master_seed, 1, rep)


def init_seed(master_seed: int, scheme_idx: int, hidden: int, rep: int) -> int:
    return _seed(master_seed, 2, scheme_idx, hidden, rep)


@dataclass(frozen=True)
class ExperimentConfig:
    schemes: tuple = ("pca", "stepwise", "all")
    hidden_sizes: tuple = (2, 3, 4, 5, 6)
    repetitions: int = 100
    master_seed: int = 0
    train_fraction: float = 0.75
    stratified: bool = True
    per_split_schemes: bool = False
    pca_variance: float = 0.90
    p_enter: float = 0.05
    p_remove: float = 0.10
    max_divergent_fraction: float = 0.10
    train: TrainConfig = field(default_factory=TrainConfig)


_SHARED: dict = {}


def _init_worker(X, y, feature_names, cfg, fitted):
    _SHARED.update(X=X, y=y, feature_names=feature_names, cfg=cfg, fitted=fitted)


def _run_job(job):
    kind, scheme_idx, hidden, rep = job
    d = _SHARED
    return _run_one(d["X"], d["y"], d["feature_names"], kind, scheme_idx, hidden, rep, d["cfg"], d["fitted"][kind])


def _run_one(X, y, feature_names, kind, scheme_idx, hidden, rep, cfg, cohort_scheme):
    sseed = split_seed(cfg.master_seed, rep)
    plan = split(y, cfg.train_fraction, sseed, cfg.stratified)
    if cohort_scheme is None:
        scheme = fit_scheme(kind, X, y, feature_names, plan.train_idx, cfg.pca_variance, cfg.p_enter, cfg.p_remove)
    else:
        scheme = cohort_scheme
    U = scheme.transform(X)
    U, in_stats = standardize(U, plan.train_idx, scheme.input_names)
    iseed = init_seed(cfg.master_seed, scheme_idx, hidden, rep)
    net = init_network(U.shape[1], hidden, iseed)
    tcfg = TrainConfig(**{**cfg.train.__dict__, "seed": iseed})
    try:
        net, curve = train(net, U[plan.train_idx], one_hot(y[plan.train_idx]), tcfg)
    except DivergenceError:
        return Repetition(kind, hidden, rep, sseed, None, math.nan, diverged=True)
    cls, score = predict(net, U[plan.test_idx])
    m = confusion_metrics(cls, y[plan.test_idx])
    curve_roc = roc(score, y[plan.test_idx])
    return Repetition(kind, hidden, rep, sseed, m, 100.0 * curve_roc.auc, curve_roc, net, in_stats,
                      scheme if cohort_scheme is None else None, epochs=len(curve))


def fit_cohort_schemes(X, y, feature_names, cfg: ExperimentConfig) -> dict:
    """Cohort-level schemes; kinds that cannot be fitted are skipped with a warning."""
    from .errors import HrvError

    out = {}
    for kind in cfg.schemes:
        try:
            out[kind] = fit_scheme(kind, X, y, feature_names, None, cfg.pca_variance, cfg.p_enter, cfg.p_remove)
        except HrvError as exc:
            warnings.warn(f"scheme {kind!r} skipped: {exc}", RuntimeWarning, stacklevel=2)
    return out


def run_experiment(X, y, feature_names: Sequence[str], cfg: ExperimentConfig = ExperimentConfig(),
                   jobs: int = 1, schemes: dict | None = None) -> RunReport:
    """Train and test ``repetitions`` networks per (scheme, hidden size).

    Every repetition shares its split across configurations (seeded by
    ``master_seed`` and the repetition index); initial weights are seeded by
    the full (scheme, hidden, repetition) key, so results do not depend on
    execution order or ``jobs``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if cfg.repetitions < 1:
        raise ConfigError("repetitions must be positive")
    for h in cfg.hidden_sizes:
        if not 2 <= h <= 6:
            raise ConfigError(f"hidden size {h} outside [2, 6]")
    if cfg.per_split_schemes:
        fitted = {k: None for k in cfg.schemes}
    else:
        fitted = schemes if schemes is not None else fit_cohort_schemes(X, y, feature_names, cfg)
    if not fitted:
        raise ExperimentError("no input scheme could be fitted")
    jobs_list = []
    for si, kind in enumerate(cfg.schemes):
        if kind not in fitted:
            continue
        for h in cfg.hidden_sizes:
            for rep in range(cfg.repetitions):
                jobs_list.append((kind, si, h, rep))
    shared = (X, y, tuple(feature_names), cfg, fitted)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=shared) as pool:
            results = list(pool.map(_run_job, jobs_list, chunksize=max(1, len(jobs_list) // (8 * jobs))))
    else:
        _init_worker(*shared)
        try:
            results = [_run_job(j) for j in jobs_list]
        finally:
            _SHARED.clear()
    report = RunReport(cfg.repetitions, results, {k: v for k, v in fitted.items() if v is not None})
    for kind, h in report.configs():
        group = [r for r in results if r.scheme == kind and r.hidden == h]
        bad = sum(r.diverged for r in group)
        if bad:
            log.warning("%s/h=%d: %d of %d repetitions diverged and were excluded", kind, h, bad, len(group))
            if bad > cfg.max_divergent_fraction * len(group):
                raise ExperimentError(f"{kind}/h={h}: {bad} of {len(group)} repetitions diverged")
    return report


def _stat(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return math.nan, math.nan, math.nan, 0
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return float(v.max()), float(v.mean()), sd, int(v.size)


def metric_values(runs, index):
    if index == "auc":
        return [r.auc for r in runs]
    return [getattr(r.metrics, index) for r in runs]


def summarize(report: RunReport):
    """Per (scheme, hidden, index): max, mean, sample SD over repetitions, plus histograms.

    Returns ``(summary rows, histogram rows)``; each summary row is
    ``(scheme, hidden, index, max, mean, sd, n)`` and each histogram row
    ``(scheme, hidden, index, bin_lo, bin_hi, count)``.
    """
    summary, hist = [], []
    for kind, h in report.configs():
        runs = report.runs(kind, h)
        for index in INDICES:
            vals = metric_values(runs, index)
            summary.append((kind, h, index) + _stat(vals))
            v = np.asarray(vals, dtype=float)
            counts, _ = np.histogram(v[np.isfinite(v)], bins=HIST_EDGES)
            for lo, hi, c in zip(HIST_EDGES[:-1], HIST_EDGES[1:], counts):
                hist.append((kind, h, index, float(lo), float(hi), int(c)))
    return summary, hist


def table1(report: RunReport):
    """Max and mean +- SD per index for each scheme's best-accuracy hidden size.

    Returns ``(columns, rows)`` where columns are ``(scheme, hidden)`` pairs
    and rows are ``(INDEX, stat, cell per column)``.
    """
    cols = []
    for kind in report.schemes or dict.fromkeys(r.scheme for r in report.results):
        best = report.best(kind)
        if best is not None:
            cols.append((kind, best.hidden))
    rows = []
    for index in INDICES:
        stats_ = [_stat(metric_values(report.runs(k, h), index)) for k, h in cols]
        rows.append((index.upper(), "Max", [_fmt(s[0]) for s in stats_]))
        rows.append((index.upper(), "Mean ± SD", [f"{_fmt(s[1])} ± {_fmt(s[2])}" for s in stats_]))
    return cols, rows


def _fmt(v):
    return "nan" if not np.isfinite(v) else f"{v:.1f}"
