"""Hamming-window periodogram, LF/HF band powers and the spectral beta exponent."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSpectrumError, ShapeError

LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.40)
# bin frequencies are k/300 Hz; keep band edges exact under rounding
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class Psd:
    freqs_hz: np.ndarray
    power: np.ndarray  # ms^2 / Hz

    @property
    def df(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])


@dataclass(frozen=True)
class BandPowers:
    lf: float
    hf: float
    lf_hf: float
    lfn: float
    hfn: float


def periodogram_psd(samples, rate_hz: float = 2.0, n_expected: int | None = 600) -> Psd:
    """One-sided periodogram of a mean-removed, Hamming-windowed segment.

    Normalized by ``rate_hz * sum(w**2)`` with interior bins doubled, so the
    integral of the PSD equals ``sum((x*w)**2) / sum(w**2)``: the
    window-weighted variance of the detrended segment.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or (n_expected is not None and x.size != n_expected):
        raise ShapeError(f"expected {n_expected} samples, got shape {x.shape}")
    n = x.size
    if n < 8:
        raise ShapeError(f"segment of {n} samples is too short for a periodogram")
    w = np.hamming(n)
    xw = (x - x.mean()) * w
    spec = np.abs(np.fft.rfft(xw)) ** 2 / (rate_hz * np.sum(w * w))
    if n % 2 == 0:
        spec[1:-1] *= 2.0
    else:
        spec[1:] *= 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / rate_hz)
    return Psd(freqs, spec)


def _band_mask(freqs, lo, hi, closed_hi):
    upper = freqs <= hi + _EDGE_EPS if closed_hi else freqs < hi - _EDGE_EPS
    return (freqs >= lo - _EDGE_EPS) & upper


def band_powers(psd: Psd, lf_band=LF_BAND, hf_band=HF_BAND) -> BandPowers:
    """LF over [lf_lo, lf_hi), HF over [hf_lo, hf_hi]; rectangle-rule integrals."""
    f, p, df = psd.freqs_hz, psd.power, psd.df
    lf = float(p[_band_mask(f, *lf_band, closed_hi=False)].sum() * df)
    hf = float(p[_band_mask(f, *hf_band, closed_hi=True)].sum() * df)
    total = lf + hf
    if not total > 0:
        raise DegenerateSpectrumError("no power in the LF and HF bands")
    return BandPowers(
        lf=lf,
        hf=hf,
        lf_hf=lf / hf if hf > 0 else float("nan"),
        lfn=lf / total,
        hfn=hf / total,
    )


def beta_exponent(psd: Psd, fit_range=(0.0, 0.40), min_bins: int = 10) -> float:
    """OLS slope of ln(power) against ln(frequency).

    Uses bins with ``fit_range[0] < f <= fit_range[1]`` and positive power.
    """
    f, p = psd.freqs_hz, psd.power
    sel = (f > fit_range[0]) & (f <= fit_range[1] + _EDGE_EPS) & (p > 0)
    if np.count_nonzero(sel) < min_bins:
        raise DegenerateSpectrumError(
            f"{np.count_nonzero(sel)} positive bins in fit range; need {min_bins}"
        )
    lx, ly = np.log(f[sel]), np.log(p[sel])
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def write_psd_dump(path, psd: Psd) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "power"])
        for f, p in zip(psd.freqs_hz, psd.power):
            w.writerow([f"{f:.6f}", repr(float(p))])
