"""Time-domain HRV parameters of a beat-domain RR slice."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooShortError


@dataclass(frozen=True)
class TimeFeatures:
    mean_rr: float
    sdnn: float
    rmssd: float
    nn50: int
    pnn50: float


def compute_time_features(rr_slice) -> TimeFeatures:
    """meanRR, SDNN (n-1 divisor), RMSSD (over n-1 differences), NN50 and pNN50.

    NN50 counts successive differences strictly greater than 50 ms.
    """
    x = np.asarray(rr_slice, dtype=float)
    n = x.size
    if n < 2:
        raise TooShortError(f"time-domain features need 2 intervals, got {n}")
    d = np.diff(x)
    nn50 = int(np.count_nonzero(np.abs(d) > 50.0))
    return TimeFeatures(
        mean_rr=float(x.mean()),
        sdnn=float(x.std(ddof=1)),
        rmssd=float(np.sqrt(np.mean(d * d))),
        nn50=nn50,
        pnn50=100.0 * nn50 / (n - 1),
    )
