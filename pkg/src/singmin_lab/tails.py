"""Heavy-tail statistics: Hill estimator, running means, empirical moments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TailIndexEstimate",
    "RunningMeanCurve",
    "hill_estimator",
    "default_hill_k",
    "running_mean_curve",
    "empirical_moment",
]


@dataclass(frozen=True)
class TailIndexEstimate:
    alpha_hat: float
    k_used: int
    ci: tuple[float, float]
    threshold: float


@dataclass(frozen=True)
class RunningMeanCurve:
    checkpoints: tuple[int, ...]
    means: tuple[float, ...]

    @property
    def final(self) -> float:
        return self.means[-1]

    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.means, self.means[1:]))

    def growth(self) -> float:
        """Relative change from the first to the last checkpoint."""
        return self.means[-1] / self.means[0] - 1.0


def default_hill_k(n_samples: int) -> int:
    return math.isqrt(n_samples)


def hill_estimator(samples, k: int | None = None) -> TailIndexEstimate:
    """Hill estimate of the right-tail index from the ``k`` largest samples.

    ``alpha_hat = k / sum_i log(X_(N-i+1) / X_(N-k))`` with the asymptotic
    95% interval ``alpha_hat * (1 +- 1.96 / sqrt(k))``.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if k is None:
        k = default_hill_k(n)
    if k < 10 or 2 * k > n:
        raise ValueError(f"need 10 <= k <= N/2, got k={k}, N={n}")
    if not np.all(np.isfinite(x)) or x[0] <= 0:
        raise ValueError("Hill estimator needs finite positive samples")
    threshold = x[n - k - 1]
    log_sum = math.fsum(np.log(x[n - k :] / threshold))
    if log_sum <= 0.0:
        raise ValueError("top order statistics are tied; log-excess sum is zero")
    alpha = k / log_sum
    half = 1.96 / math.sqrt(k)
    return TailIndexEstimate(alpha, k, (alpha * (1.0 - half), alpha * (1.0 + half)), float(threshold))


def running_mean_curve(samples, checkpoints) -> RunningMeanCurve:
    """Prefix means at each checkpoint, summed with ``math.fsum``."""
    x = np.asarray(samples, dtype=np.float64)
    cps = tuple(int(c) for c in checkpoints)
    if any(c < 1 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])) or cps[-1] > x.size:
        raise ValueError("checkpoints must be ascending, positive and at most the sample count")
    means = tuple(math.fsum(x[:c]) / c for c in cps)
    return RunningMeanCurve(cps, means)


def empirical_moment(samples, alpha: float) -> float:
    """Mean of ``samples ** alpha``; an infinite sample makes the result infinite."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("no samples")
    if alpha == 0:
        return 1.0
    return math.fsum(x**alpha) / x.size
