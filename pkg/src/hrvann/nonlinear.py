"""Poincare plot descriptors and Higuchi fractal dimension."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooShortError


@dataclass(frozen=True)
class PoincareFeatures:
    sd1: float
    sd2: float
    sd1_sd2: float  # nan when sd2 == 0


@dataclass(frozen=True)
class FractalFeatures:
    fd: float
    k_max: int


def poincare_moments(rr_slice) -> tuple[float, float]:
    """Return ``(sd1**2, sd2**2)`` before clamping, from population variances."""
    x = np.asarray(rr_slice, dtype=float)
    if x.size < 3:
        raise TooShortError(f"Poincare descriptors need 3 intervals, got {x.size}")
    sd1_sq = np.var(np.diff(x)) / 2.0
    return float(sd1_sq), float(2.0 * np.var(x) - sd1_sq)


def poincare(rr_slice) -> PoincareFeatures:
    sd1_sq, sd2_sq = poincare_moments(rr_slice)
    sd1 = float(np.sqrt(sd1_sq))
    sd2 = float(np.sqrt(max(0.0, sd2_sq)))
    return PoincareFeatures(sd1, sd2, sd1 / sd2 if sd2 > 0 else float("nan"))


def curve_lengths(x, k_max: int) -> np.ndarray:
    """Mean normalized curve length L(k) for k = 1..k_max."""
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.empty(k_max)
    for k in range(1, k_max + 1):
        total = 0.0
        for m in range(k):  # zero-based offset
            sub = x[m::k]
            n_seg = sub.size - 1
            total += np.abs(np.diff(sub)).sum() * (n - 1) / (n_seg * k) / k
        out[k - 1] = total / k
    return out


def higuchi_fd(rr_slice, k_max: int = 10) -> FractalFeatures:
    """Negative OLS slope of ln L(k) against ln k."""
    x = np.asarray(rr_slice, dtype=float)
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if x.size < 2 * k_max + 2:
        raise TooShortError(f"Higuchi FD with k_max={k_max} needs {2 * k_max + 2} points, got {x.size}")
    lengths = curve_lengths(x, k_max)
    if np.any(lengths <= 0):
        # flat series: no curve length at any scale
        return FractalFeatures(float("nan"), k_max)
    lk = np.log(np.arange(1, k_max + 1))
    ll = np.log(lengths)
    lk = lk - lk.mean()
    slope = np.dot(lk, ll - ll.mean()) / np.dot(lk, lk)
    return FractalFeatures(float(-slope), k_max)
