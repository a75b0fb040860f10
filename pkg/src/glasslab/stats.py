"""Small statistical reducers shared by the estimators.

All reducers are associative up to floating-point reassociation, so sweeps
may be chunked freely; summaries recomputed from concatenated per-draw
arrays match the serial path bit for bit when the draw order is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def mean_and_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    if n == 1:
        return float(x[0]), math.inf
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class VarianceEstimate:
    """Sample variance with a jackknife standard error and normal CI."""

    mean: float
    variance: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int


def variance_with_jackknife(x, z: float = 3.0) -> VarianceEstimate:
    """Unbiased sample variance; CI half-width is ``z`` jackknife errors."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 3:
        raise ValueError("need at least 3 draws for a jackknife variance")
    s1, s2 = x.sum(), (x * x).sum()
    var = (s2 - s1 * s1 / n) / (n - 1)
    # leave-one-out variances from running sums
    mu_i = (s1 - x) / (n - 1)
    var_i = (s2 - x * x - (n - 1) * mu_i * mu_i) / (n - 2)
    se = math.sqrt((n - 1) / n * np.sum((var_i - var_i.mean()) ** 2))
    return VarianceEstimate(
        mean=float(x.mean()),
        variance=float(var),
        stderr=float(se),
        ci_low=float(var - z * se),
        ci_high=float(var + z * se),
        n=n,
    )


def autocovariances(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocovariance estimates gamma_0 .. gamma_maxlag via FFT."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[: max_lag + 1]
    return acov / n


def integrated_autocorr_time(x) -> float:
    """Initial-positive-sequence estimate of the integrated autocorrelation.

    Sums paired autocovariances Gamma_m = gamma_{2m} + gamma_{2m+1} while
    they remain positive (Geyer's initial sequence); returns tau such that
    var(mean) ~ tau * var(x) / n.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 4:
        return 1.0
    acov = autocovariances(x, n - 1)
    if acov[0] <= 0:
        return 1.0
    total = -acov[0]
    for m in range(n // 2):
        pair = acov[2 * m] + (acov[2 * m + 1] if 2 * m + 1 < n else 0.0)
        if pair <= 0:
            break
        total += 2 * pair
    tau = total / acov[0]
    return max(tau, 1.0)


def chain_mean_stderr(x) -> tuple[float, float]:
    """Mean of a correlated chain with an IAT-corrected standard error."""
    x = np.asarray(x, dtype=np.float64)
    tau = integrated_autocorr_time(x)
    mean = float(x.mean())
    se = float(math.sqrt(tau * x.var(ddof=1) / x.size)) if x.size > 1 else math.inf
    return mean, se
