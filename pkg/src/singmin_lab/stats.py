"""Binomial confidence intervals."""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

__all__ = ["z_value", "wilson_interval"]


def z_value(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def wilson_interval(count, total, level: float = 0.95):
    """Wilson score interval for ``count`` successes out of ``total``.

    Unlike the normal approximation it stays inside [0, 1] and has a
    sensible width when ``count`` is 0, which is the small-ball regime.
    Works elementwise on arrays; returns ``(p_hat, lo, hi)``.
    """
    count = np.asarray(count, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    if np.any(total < 1) or np.any(count < 0) or np.any(count > total):
        raise ValueError("need 0 <= count <= total and total >= 1")
    z = z_value(level)
    p = count / total
    z2n = z * z / total
    denom = 1.0 + z2n
    centre = (p + z2n / 2.0) / denom
    half = z * np.sqrt(p * (1.0 - p) / total + z2n / (4.0 * total)) / denom
    lo = np.clip(centre - half, 0.0, p)
    hi = np.clip(centre + half, p, 1.0)
    return p, lo, hi
