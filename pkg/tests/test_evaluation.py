import math

import numpy as np
import pytest
from scipy.stats import mannwhitneyu

from hrvann.errors import ConfigError, DegenerateLabelsError, ShapeError
from hrvann.evaluation import (
    ExperimentConfig,
    Metrics,
    Repetition,
    RunReport,
    confusion_metrics,
    init_seed,
    roc,
    run_experiment,
    split,
    split_seed,
    summarize,
    table1,
)
from hrvann.features import FEATURE_NAMES
from hrvann.network import TrainConfig


def mann_whitney_auc(scores, labels):
    pos, neg = scores[labels == 1], scores[labels == 0]
    u = mannwhitneyu(pos, neg, alternative="two-sided").statistic
    return u / (pos.size * neg.size)


def test_split_balanced_hundred():
    y = np.repeat([0, 1], 50)
    plan = split(y, 0.75, seed=3)
    assert plan.train_idx.size == 75 and plan.test_idx.size == 25
    per_class = np.bincount(y[plan.train_idx])
    assert sorted(per_class.tolist()) == [37, 38]


def test_split_paper_shape_counts():
    y = np.r_[np.zeros(681, int), np.ones(284, int)]
    for seed in range(5):
        plan = split(y, seed=seed)
        assert plan.train_idx.size == 724 and plan.test_idx.size == 241
        assert np.bincount(y[plan.train_idx]).tolist() == [511, 213]
        assert np.intersect1d(plan.train_idx, plan.test_idx).size == 0
        assert np.union1d(plan.train_idx, plan.test_idx).size == 965


def test_split_deterministic_and_seed_sensitive():
    y = np.r_[np.zeros(30, int), np.ones(20, int)]
    a, b, c = split(y, seed=1), split(y, seed=1), split(y, seed=2)
    assert np.array_equal(a.train_idx, b.train_idx)
    assert not np.array_equal(a.train_idx, c.train_idx)


def test_split_unstratified_size():
    y = np.r_[np.zeros(30, int), np.ones(20, int)]
    assert split(y, seed=0, stratified=False).train_idx.size == 38


def test_split_small_class():
    with pytest.raises(ConfigError):
        split(np.r_[np.zeros(20, int), np.ones(3, int)])


def test_confusion_hand_example():
    y = [1] * 5 + [0] * 5
    p = [1, 1, 1, 0, 0] + [1, 0, 0, 0, 0]
    m = confusion_metrics(p, y)
    assert (m.tp, m.fp, m.fn, m.tn) == (3, 1, 2, 4)
    assert (m.sen, m.spe, m.pre, m.acc) == (60.0, 80.0, 75.0, 70.0)


def test_confusion_perfect_and_degenerate():
    y = np.array([0, 1, 1, 0])
    m = confusion_metrics(y, y)
    assert (m.sen, m.spe, m.pre, m.acc) == (100.0, 100.0, 100.0, 100.0)
    m = confusion_metrics(np.zeros(4, int), y)
    assert m.sen == 0.0 and math.isnan(m.pre)


def test_confusion_identities(rng):
    for _ in range(50):
        y = rng.integers(0, 2, 40)
        p = rng.integers(0, 2, 40)
        m = confusion_metrics(p, y)
        assert m.acc * 40 / 100 == pytest.approx(m.tp + m.tn)
        for v in (m.sen, m.spe, m.pre, m.acc):
            assert math.isnan(v) or 0 <= v <= 100


def test_confusion_shape_error():
    with pytest.raises(ShapeError):
        confusion_metrics([1, 0], [1])


def test_roc_matches_mann_whitney(rng):
    for _ in range(100):
        n = int(rng.integers(5, 200))
        y = rng.integers(0, 2, n)
        y[:2] = [0, 1]
        s = np.round(rng.random(n), int(rng.integers(1, 4)))  # rounding forces ties
        assert roc(s, y).auc == pytest.approx(mann_whitney_auc(s, y), abs=1e-9)


def test_roc_perfect_separation():
    c = roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert c.auc == 1.0
    assert (c.fpr[0], c.tpr[0], c.fpr[-1], c.tpr[-1]) == (0, 0, 1, 1)


def test_roc_reversal(rng):
    s, y = rng.random(300), rng.integers(0, 2, 300)
    assert roc(-s, y).auc == pytest.approx(1 - roc(s, y).auc, abs=1e-12)


def test_roc_null(rng):
    assert roc(rng.random(10_000), rng.integers(0, 2, 10_000)).auc == pytest.approx(0.5, abs=0.02)


def test_roc_monotone(rng):
    c = roc(rng.random(100), rng.integers(0, 2, 100))
    assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)


def test_roc_single_class():
    with pytest.raises(DegenerateLabelsError):
        roc([0.1, 0.4], [1, 1])


def test_seeds_distinct():
    seeds = {split_seed(0, r) for r in range(100)} | {init_seed(0, s, h, r) for s in range(3) for h in range(2, 7) for r in range(100)}
    assert len(seeds) == 100 + 1500


def _report_from_acc(values):
    runs = [Repetition("all", 2, i, 0, Metrics(0, 0, 0, 0, v, v, v, v), v) for i, v in enumerate(values)]
    return RunReport(len(values), runs)


def test_summarize_hand_arithmetic():
    summary, hist = summarize(_report_from_acc([70.0, 80.0, 90.0]))
    row = next(r for r in summary if r[2] == "acc")
    assert row[3:] == (90.0, 80.0, 10.0, 3)
    acc_hist = [r for r in hist if r[2] == "acc"]
    assert len(acc_hist) == 20 and sum(r[5] for r in acc_hist) == 3


def test_summarize_constant():
    summary, _ = summarize(_report_from_acc([55.0] * 4))
    for r in summary:
        assert r[3] == r[4] == 55.0 and r[5] == 0.0


def test_table1_layout():
    cols, rows = table1(_report_from_acc([70.0, 80.0, 90.0]))
    assert cols == [("all", 2)]
    assert [(r[0], r[1]) for r in rows[:2]] == [("SEN", "Max"), ("SEN", "Mean ± SD")]
    assert rows[7][2] == ["80.0 ± 10.0"]
    assert len(rows) == 10


def toy_features(seed, n0=60, n1=40, shift=1.5):
    r = np.random.default_rng(seed)
    y = np.r_[np.zeros(n0, int), np.ones(n1, int)]
    X = r.normal(size=(y.size, len(FEATURE_NAMES)))
    X[:, 0] += shift * y
    X[:, FEATURE_NAMES.index("gender")] = r.integers(0, 2, y.size)
    return X, y


FAST = TrainConfig(max_epochs=200)


def test_single_repetition_report():
    X, y = toy_features(0)
    cfg = ExperimentConfig(schemes=("all",), hidden_sizes=(3,), repetitions=1, train=FAST)
    rep = run_experiment(X, y, FEATURE_NAMES, cfg)
    assert len(rep.results) == 1
    assert rep.results[0].metrics.tp + rep.results[0].metrics.fn == 10


def test_protocol_shape_and_determinism():
    X, y = toy_features(1)
    cfg = ExperimentConfig(hidden_sizes=(2, 3), repetitions=3, train=FAST)
    a = run_experiment(X, y, FEATURE_NAMES, cfg)
    b = run_experiment(X, y, FEATURE_NAMES, cfg, jobs=2)
    assert len(a.results) == 3 * 2 * 3
    assert [(r.scheme, r.hidden, r.rep, r.metrics, r.auc) for r in a.results] == \
           [(r.scheme, r.hidden, r.rep, r.metrics, r.auc) for r in b.results]


def test_best_by_accuracy():
    X, y = toy_features(2)
    cfg = ExperimentConfig(schemes=("all",), hidden_sizes=(2, 4), repetitions=4, train=FAST)
    rep = run_experiment(X, y, FEATURE_NAMES, cfg)
    best = rep.best("all")
    assert best.metrics.acc == max(r.metrics.acc for r in rep.results)


def test_per_split_schemes_run():
    X, y = toy_features(3)
    cfg = ExperimentConfig(schemes=("pca",), hidden_sizes=(2,), repetitions=2, per_split_schemes=True, train=FAST)
    rep = run_experiment(X, y, FEATURE_NAMES, cfg)
    assert all(r.scheme_obj is not None for r in rep.results)


def test_bad_hidden_rejected():
    X, y = toy_features(4)
    with pytest.raises(ConfigError):
        run_experiment(X, y, FEATURE_NAMES, ExperimentConfig(hidden_sizes=(8,)))
