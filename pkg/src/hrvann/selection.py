"""Standardization and the three network input schemes (PCA, stepwise, all)."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, ConstantFeatureError, EmptySelectionError, ModelFormatError, ShapeError

SCHEME_KINDS = ("pca", "stepwise", "all")
SCHEME_FORMAT = "hrvann-scheme"
SCHEME_VERSION = 1


@dataclass(frozen=True)
class ColumnStats:
    mean: np.ndarray
    sd: np.ndarray

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.sd

    def to_dict(self):
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["sd"], dtype=float))


def standardize(X, fit_rows=None, names: Sequence[str] | None = None):
    """Z-score every column with mean and sample SD taken over ``fit_rows``.

    Returns ``(Z, stats)``; all rows are transformed, including those outside
    ``fit_rows``, without clipping.
    """
    X = np.asarray(X, dtype=float)
    fit = X if fit_rows is None else X[fit_rows]
    if fit.shape[0] < 2:
        raise ShapeError("standardization needs at least 2 fitting rows")
    mean = fit.mean(axis=0)
    sd = fit.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        col = bad[0]
        raise ConstantFeatureError(names[col] if names is not None else f"column {col}")
    st = ColumnStats(mean, sd)
    return st.apply(X), st


@dataclass
class InputScheme:
    """Maps a raw 17-feature row to network inputs.

    ``stats`` standardizes the raw row; ``basis`` (pca) projects it onto
    retained components, ``selection`` (stepwise/all) picks columns.
    """

    kind: str
    feature_names: tuple
    stats: ColumnStats
    basis: np.ndarray | None = None
    center: np.ndarray | None = None
    explained_ratio: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    selection: tuple = ()
    pvalues: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1] if self.kind == "pca" else len(self.selection)

    @property
    def input_names(self) -> list[str]:
        if self.kind == "pca":
            return [f"pc{i + 1}" for i in range(self.dimension)]
        return [self.feature_names[i] for i in self.selection]

    def transform(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise ShapeError(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        Z = self.stats.apply(X)
        if self.kind == "pca":
            return pca_transform(self, Z)
        return Z[:, list(self.selection)]

    def describe(self) -> str:
        if self.kind == "pca":
            cum = float(np.sum(self.explained_ratio[: self.dimension]))
            return f"{self.dimension} components, {round(100 * cum)} %"
        names = [_DISPLAY.get(n, n) for n in self.input_names]
        if len(names) == 1:
            return names[0]
        return ", ".join(names[:-1]) + " and " + names[-1]

    def to_dict(self) -> dict:
        d = {
            "format": SCHEME_FORMAT,
            "version": SCHEME_VERSION,
            "kind": self.kind,
            "feature_names": list(self.feature_names),
            "stats": self.stats.to_dict(),
        }
        if self.kind == "pca":
            d.update(
                basis=self.basis.tolist(),
                center=self.center.tolist(),
                explained_ratio=self.explained_ratio.tolist(),
                eigenvalues=self.eigenvalues.tolist(),
            )
        else:
            d.update(selection=list(self.selection), pvalues=self.pvalues)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InputScheme":
        if d.get("format") != SCHEME_FORMAT or d.get("version") != SCHEME_VERSION:
            raise ModelFormatError(f"unsupported scheme format {d.get('format')!r} v{d.get('version')!r}")
        kw = dict(kind=d["kind"], feature_names=tuple(d["feature_names"]), stats=ColumnStats.from_dict(d["stats"]))
        if d["kind"] == "pca":
            kw.update(
                basis=np.asarray(d["basis"], dtype=float).reshape(len(kw["feature_names"]), -1),
                center=np.asarray(d["center"], dtype=float),
                explained_ratio=np.asarray(d["explained_ratio"], dtype=float),
                eigenvalues=np.asarray(d["eigenvalues"], dtype=float),
            )
        else:
            kw.update(selection=tuple(d["selection"]), pvalues=dict(d.get("pvalues", {})))
        return cls(**kw)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "InputScheme":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


_DISPLAY = {
    "mean_rr": "meanRR", "sdnn": "SDNN", "rmssd": "RMSSD", "nn50": "NN50", "pnn50": "pNN50",
    "lf": "LF", "hf": "HF", "lf_hf": "LF/HF", "lfn": "LFn", "hfn": "HFn",
    "sd1": "SD1", "sd2": "SD2", "sd1_sd2": "SD1/SD2", "fd": "FD", "beta": "beta",
}


def _identity_stats(p):
    return ColumnStats(np.zeros(p), np.ones(p))


def pca_fit(Z, variance: float = 0.90, feature_names=None, stats: ColumnStats | None = None) -> InputScheme:
    """Eigen-decomposition of the column covariance of an (already standardized) matrix.

    Keeps the smallest number of leading components whose cumulative
    explained-variance ratio reaches ``variance``.
    """
    Z = np.asarray(Z, dtype=float)
    n, p = Z.shape
    if n < p:
        raise ShapeError(f"PCA needs at least as many rows as columns ({n} < {p})")
    center = Z.mean(axis=0)
    cov = np.cov(Z - center, rowvar=False, ddof=1).reshape(p, p)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    tol = max(evals[0], 0.0) * p * np.finfo(float).eps * 10
    positive = evals > tol
    if not positive.all():
        warnings.warn(
            f"covariance is rank deficient: keeping {int(positive.sum())} of {p} directions",
            RuntimeWarning,
            stacklevel=2,
        )
    evals = np.where(positive, evals, 0.0)
    # deterministic sign: largest-magnitude loading of each component is positive
    signs = np.sign(evecs[np.argmax(np.abs(evecs), axis=0), np.arange(p)])
    evecs = evecs * np.where(signs == 0, 1.0, signs)
    ratio = evals / evals.sum()
    cum = np.cumsum(ratio)
    k = int(np.searchsorted(cum, variance - 1e-12) + 1)
    k = min(k, int(positive.sum()))
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(p))
    return InputScheme(
        kind="pca",
        feature_names=names,
        stats=stats if stats is not None else _identity_stats(p),
        basis=evecs[:, :k].copy(),
        center=center,
        explained_ratio=ratio,
        eigenvalues=evals,
    )


def pca_transform(scheme: InputScheme, Z) -> np.ndarray:
    """Project standardized rows onto the retained components."""
    if scheme.kind != "pca":
        raise ConfigError(f"scheme kind is {scheme.kind!r}, not 'pca'")
    Z = np.asarray(Z, dtype=float)
    single = Z.ndim == 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != scheme.basis.shape[0]:
        raise ShapeError(f"expected {scheme.basis.shape[0]} columns, got {Z.shape[1]}")
    out = (Z - scheme.center) @ scheme.basis
    return out[0] if single else out


def ols_pvalues(X, y, cols: Sequence[int]) -> np.ndarray:
    """Two-sided t-test p-values of the slope coefficients of ``y ~ 1 + X[:, cols]``."""
    n = X.shape[0]
    A = np.column_stack([np.ones(n), X[:, list(cols)]])
    dof = n - A.shape[1]
    if dof <= 0:
        return np.full(len(cols), np.nan)
    beta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < A.shape[1]:
        return np.full(len(cols), np.nan)
    resid = y - A @ beta
    sigma2 = resid @ resid / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    se = np.sqrt(np.diag(cov)[1:])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = beta[1:] / se
    return 2.0 * stats.t.sf(np.abs(t), dof)


def stepwise_select(Z, labels, p_enter: float = 0.05, p_remove: float = 0.10,
                    feature_names=None, stats: ColumnStats | None = None, max_steps: int = 200) -> InputScheme:
    """Forward-backward stepwise OLS of the 0/1 label on the columns of ``Z``.

    Each forward step adds the candidate with the smallest p-value when it
    is below ``p_enter``; afterwards any included column whose p-value is at
    least ``p_remove`` is dropped, worst first.  Ties go to the lower column
    index.
    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(labels, dtype=float)
    n, p = Z.shape
    if n <= p + 2:
        raise ShapeError(f"stepwise regression needs more than {p + 2} rows, got {n}")
    if p_remove < p_enter:
        raise ConfigError("p_remove must not be below p_enter")
    included: list[int] = []
    seen = set()
    for _ in range(max_steps):
        changed = False
        candidates = [j for j in range(p) if j not in included]
        if candidates:
            pv = np.array([ols_pvalues(Z, y, included + [j])[-1] for j in candidates])
            pv = np.where(np.isnan(pv), np.inf, pv)
            best = int(np.argmin(pv))
            if pv[best] < p_enter:
                included.append(candidates[best])
                changed = True
        while included:
            pv = ols_pvalues(Z, y, included)
            pv = np.where(np.isnan(pv), np.inf, pv)
            worst = int(np.argmax(pv))
            if pv[worst] >= p_remove:
                included.pop(worst)
                changed = True
            else:
                break
        state = tuple(sorted(included))
        if not changed or state in seen:
            break
        seen.add(state)
    if not included:
        raise EmptySelectionError(f"no feature reaches p < {p_enter}")
    final = sorted(included)
    pv = ols_pvalues(Z, y, final)
    names = tuple(feature_names) if feature_names is not None else tuple(f"x{i}" for i in range(p))
    return InputScheme(
        kind="stepwise",
        feature_names=names,
        stats=stats if stats is not None else _identity_stats(p),
        selection=tuple(final),
        pvalues={names[j]: float(v) for j, v in zip(final, pv)},
    )


def all_features(feature_names, stats: ColumnStats | None = None) -> InputScheme:
    p = len(feature_names)
    return InputScheme(
        kind="all",
        feature_names=tuple(feature_names),
        stats=stats if stats is not None else _identity_stats(p),
        selection=tuple(range(p)),
    )


def fit_scheme(kind: str, X, labels, feature_names, fit_rows=None, variance: float = 0.90,
               p_enter: float = 0.05, p_remove: float = 0.10) -> InputScheme:
    """Standardize raw features on ``fit_rows`` and fit the requested scheme there."""
    if kind not in SCHEME_KINDS:
        raise ConfigError(f"unknown scheme {kind!r}; expected one of {SCHEME_KINDS}")
    X = np.asarray(X, dtype=float)
    rows = np.arange(X.shape[0]) if fit_rows is None else np.asarray(fit_rows)
    Z, st = standardize(X, rows, feature_names)
    if kind == "pca":
        return pca_fit(Z[rows], variance, feature_names, st)
    if kind == "stepwise":
        return stepwise_select(Z[rows], np.asarray(labels)[rows], p_enter, p_remove, feature_names, st)
    return all_features(feature_names, st)
