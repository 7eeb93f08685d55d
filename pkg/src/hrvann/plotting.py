"""Metric-distribution and ROC figures rendered from the report files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .reports import read_csv  # noqa: E402

PANEL_INDICES = (("sen", "Sensitivity"), ("spe", "Specificity"), ("pre", "Precision"), ("acc", "Accuracy"))
_SAVE_KW = dict(dpi=120, metadata={"Software": None})

plt.rcParams.update({
    "font.size": 9,
    "axes.titlesize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
})


def _best_configs(out_dir):
    return [(r["scheme"], int(r["hidden"])) for r in read_csv(Path(out_dir) / "selected.csv")]


def plot_distributions(out_dir, path=None) -> Path:
    """One row of histograms (SEN, SPE, PRE, ACC) per scheme at its best hidden size."""
    out_dir = Path(out_dir)
    reps = read_csv(out_dir / "repetitions.csv")
    configs = _best_configs(out_dir)
    fig, axes = plt.subplots(len(configs), 4, figsize=(10, 2.2 * len(configs)), squeeze=False)
    bins = np.linspace(0, 100, 21)
    for row, (kind, hidden) in enumerate(configs):
        runs = [r for r in reps if r["scheme"] == kind and int(r["hidden"]) == hidden]
        for col, (key, title) in enumerate(PANEL_INDICES):
            ax = axes[row, col]
            v = np.array([float(r[key]) for r in runs])
            v = v[np.isfinite(v)]
            ax.hist(v, bins=bins, color="0.45", edgecolor="white")
            if v.size:
                ax.axvline(v.mean(), color="k", lw=1)
            ax.set_xlim(0, 100)
            ax.set_title(f"{title} - {kind}, {hidden} hidden")
            if col == 0:
                ax.set_ylabel("count")
            if row == len(configs) - 1:
                ax.set_xlabel("%")
    fig.tight_layout()
    path = Path(path) if path else out_dir / "figure1_distributions.png"
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_roc(out_dir, path=None) -> Path:
    """Test-set ROC curve of the best-accuracy network of each scheme."""
    out_dir = Path(out_dir)
    pts = read_csv(out_dir / "roc_best.csv")
    sel = {r["scheme"]: r for r in read_csv(out_dir / "selected.csv")}
    kinds = list(dict.fromkeys(r["scheme"] for r in pts))
    fig, axes = plt.subplots(1, max(1, len(kinds)), figsize=(3.2 * max(1, len(kinds)), 3.2), squeeze=False)
    for ax, kind in zip(axes[0], kinds):
        sub = [r for r in pts if r["scheme"] == kind]
        fpr = [float(r["fpr"]) for r in sub]
        tpr = [float(r["tpr"]) for r in sub]
        ax.plot(fpr, tpr, color="k", lw=1.2)
        ax.plot([0, 1], [0, 1], color="0.6", ls="--", lw=0.8)
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1)
        ax.set_aspect("equal")
        auc = float(sel[kind]["auc"]) if kind in sel else float("nan")
        ax.set_title(f"{kind}, {sub[0]['hidden']} hidden (AUC {auc:.1f} %)")
        ax.set_xlabel("1 - specificity")
        ax.set_ylabel("sensitivity")
    fig.tight_layout()
    path = Path(path) if path else out_dir / "figure2_roc.png"
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
