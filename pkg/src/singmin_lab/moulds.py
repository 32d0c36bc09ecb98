"""Small-ball probabilities and mould membership evidence.

A point ``x`` lies in the order-``m`` mould of a random vector ``X`` when
``P(|X - x| < eps) / eps**m`` stays bounded away from zero as ``eps -> 0``.
Only finitely many radii can ever be simulated, so everything here produces
*evidence* with binomial confidence bounds, evaluated along ``eps = 1/k``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import EnsembleSpec, sample_rows
from .parallel import gather
from .rng import DOMAIN_LAW, uniforms
from .stats import wilson_interval
from .tails import RunningMeanCurve, running_mean_curve

__all__ = [
    "VectorLaw",
    "UniformBox",
    "PointMass",
    "AtomMixture",
    "DiagonalSegment",
    "EnsembleRows",
    "SmallBallEstimate",
    "MouldRatioSeq",
    "Verdict",
    "small_ball_estimate",
    "mould_ratio_sequence",
    "membership_verdict",
    "membership_survey",
    "expectation_lemma_check",
    "reciprocal_moment_divergence",
    "dilation_pushforward_check",
    "DEFAULT_K_GRID",
]

DEFAULT_K_GRID = (4, 8, 16, 32, 64, 128, 256)
MIN_BALL_COUNT = 20


# --- laws -----------------------------------------------------------------


class VectorLaw:
    """A distribution on R^dim with counter-addressed draws."""

    dim: int
    has_atoms: bool = False

    def draw(self, seed, index: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformBox(VectorLaw):
    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self):
        low = tuple(float(v) for v in np.atleast_1d(self.low))
        high = tuple(float(v) for v in np.atleast_1d(self.high))
        if len(low) != len(high) or not all(h > l for l, h in zip(low, high)):
            raise ValueError("need matching bounds with high > low")
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def dim(self) -> int:
        return len(self.low)

    def draw(self, seed, index):
        u = uniforms(seed, index, 0, self.dim, DOMAIN_LAW)
        low = np.array(self.low)
        return low + (np.array(self.high) - low) * u


@dataclass(frozen=True)
class PointMass(VectorLaw):
    point: tuple[float, ...]
    has_atoms = True

    @property
    def dim(self) -> int:
        return len(self.point)

    def draw(self, seed, index):
        return np.broadcast_to(np.array(self.point, dtype=float), (len(index), self.dim)).copy()


@dataclass(frozen=True)
class AtomMixture(VectorLaw):
    """With probability ``weight`` the atom ``point``, otherwise ``base``."""

    point: tuple[float, ...]
    weight: float
    base: VectorLaw
    has_atoms = True

    @property
    def dim(self) -> int:
        return self.base.dim

    def draw(self, seed, index):
        out = self.base.draw(seed, index)
        hit = uniforms(seed, index, 1, 1, DOMAIN_LAW)[:, 0] < self.weight
        out[hit] = np.array(self.point, dtype=float)
        return out


@dataclass(frozen=True)
class DiagonalSegment(VectorLaw):
    """Uniform on ``{(t, ..., t): low <= t <= high}``, a 1-dimensional law in R^dim."""

    dim: int
    low: float = 0.0
    high: float = 1.0

    def draw(self, seed, index):
        t = self.low + (self.high - self.low) * uniforms(seed, index, 0, 1, DOMAIN_LAW)
        return np.repeat(t, self.dim, axis=1)


@dataclass(frozen=True)
class EnsembleRows(VectorLaw):
    """Law of one row of an ensemble (row 0 of matrix ``index``)."""

    spec: EnsembleSpec

    @property
    def dim(self) -> int:
        return self.spec.n

    def draw(self, seed, index):
        return sample_rows(self.spec, seed, index, 0)


# --- sampling helpers -----------------------------------------------------


def _distance_chunk(law, x, seed, start, stop):
    idx = np.arange(start, stop, dtype=np.uint64)
    return {"d": np.linalg.norm(law.draw(seed, idx) - x, axis=1)}


def _distances(law: VectorLaw, x, n_samples: int, seed, workers: int = 1) -> np.ndarray:
    x = _point(law, x)
    return gather(_distance_chunk, n_samples, (law, x, seed), workers)["d"]


def _point(law, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (law.dim,):
        raise ValueError(f"point has dimension {x.shape}, law has dimension {law.dim}")
    return x


# --- small balls ----------------------------------------------------------


@dataclass(frozen=True)
class SmallBallEstimate:
    eps: float
    count: int
    n_samples: int
    p_hat: float
    ci: tuple[float, float]


def small_ball_estimate(law: VectorLaw, x, eps: float, n_samples: int, seed, level: float = 0.95, workers: int = 1):
    """Fraction of draws inside the open Euclidean ball ``B(x, eps)``."""
    if not eps > 0 or n_samples < 1:
        raise ValueError("need eps > 0 and at least one sample")
    d = _distances(law, x, n_samples, seed, workers)
    count = int(np.count_nonzero(d < eps))
    p, lo, hi = wilson_interval(count, n_samples, level)
    return SmallBallEstimate(float(eps), count, n_samples, float(p), (float(lo), float(hi)))


@dataclass(frozen=True)
class MouldRatioSeq:
    """``k**m * P(|X - x| < 1/k)`` along increasing ``k`` with scaled Wilson bounds."""

    point: tuple[float, ...]
    order: int
    n_samples: int
    ks: tuple[int, ...]
    counts: tuple[int, ...]
    ratio: tuple[float, ...]
    ci_lo: tuple[float, ...]
    ci_hi: tuple[float, ...]

    @property
    def half_width(self) -> tuple[float, ...]:
        return tuple((h - l) / 2.0 for l, h in zip(self.ci_lo, self.ci_hi))

    csv_header = ("k", "eps", "count", "N", "ratio", "ci_lo", "ci_hi")

    def csv_rows(self):
        for k, c, r, lo, hi in zip(self.ks, self.counts, self.ratio, self.ci_lo, self.ci_hi):
            yield (k, 1.0 / k, c, self.n_samples, r, lo, hi)


def _ratio_seq(dist, x, m, ks, level):
    n = dist.size
    counts = np.array([np.count_nonzero(dist < 1.0 / k) for k in ks])
    p, lo, hi = wilson_interval(counts, n, level)
    scale = np.array(ks, dtype=float) ** m
    return MouldRatioSeq(
        tuple(float(v) for v in x),
        m,
        n,
        tuple(int(k) for k in ks),
        tuple(int(c) for c in counts),
        tuple((scale * p).tolist()),
        tuple((scale * lo).tolist()),
        tuple((scale * hi).tolist()),
    )


def _check_ks(ks):
    ks = tuple(int(k) for k in ks)
    if not ks or ks[0] < 1 or any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_list must be strictly increasing positive integers")
    return ks


def _cap_default_grid(dist, ks):
    # keep radii whose balls still hold enough draws; at least three entries
    keep = tuple(k for k in ks if np.count_nonzero(dist < 1.0 / k) >= MIN_BALL_COUNT)
    return keep if len(keep) >= 3 else ks[:3]


def mould_ratio_sequence(
    law: VectorLaw, x, m: int, k_list=None, n_samples: int = 10**6, seed=0, level: float = 0.95, workers: int = 1
) -> MouldRatioSeq:
    """Ratio sequence for the order-``m`` mould at ``x``.

    With ``k_list=None`` the grid 4, 8, ..., 256 is used, truncated where the
    ball counts drop below 20 (the interval would dominate the estimate).
    """
    if m < 0:
        raise ValueError("mould order must be >= 0")
    x = _point(law, x)
    dist = _distances(law, x, n_samples, seed, workers)
    if k_list is None:
        ks = _cap_default_grid(dist, DEFAULT_K_GRID)
    else:
        ks = _check_ks(k_list)
    return _ratio_seq(dist, x, m, ks, level)


class Verdict(str, enum.Enum):
    MEMBER = "MemberEvidence"
    NON_MEMBER = "NonMemberEvidence"
    INCONCLUSIVE = "Inconclusive"


def membership_verdict(seq: MouldRatioSeq, threshold: float) -> Verdict:
    """Decide from the last three radii: all lower bounds above ``threshold``
    is member evidence, all upper bounds below it is non-member evidence."""
    if len(seq.ks) < 3:
        raise ValueError("membership verdict needs at least 3 radii")
    if all(lo > threshold for lo in seq.ci_lo[-3:]):
        return Verdict.MEMBER
    if all(hi < threshold for hi in seq.ci_hi[-3:]):
        return Verdict.NON_MEMBER
    return Verdict.INCONCLUSIVE


def membership_survey(law: VectorLaw, points, m: int, k_list, threshold: float, n_samples: int, seed, level=0.95):
    """Verdicts at many points from one shared set of draws."""
    ks = _check_ks(k_list)
    draws = law.draw(seed, np.arange(n_samples, dtype=np.uint64))
    out = []
    for x in np.atleast_2d(np.asarray(points, dtype=float)):
        dist = np.linalg.norm(draws - _point(law, x), axis=1)
        seq = _ratio_seq(dist, x, m, ks, level)
        out.append((seq, membership_verdict(seq, threshold)))
    return out


# --- divergence of expectations ------------------------------------------


@dataclass(frozen=True)
class ExpectationLemmaReport:
    t: tuple[float, ...]
    tail_product: tuple[float, ...]  # t * (1 - F(t))
    tail_lo: tuple[float, ...]
    tail_hi: tuple[float, ...]
    running_mean: RunningMeanCurve
    q0: float
    tail_bounded_below: bool
    mean_growing: bool

    @property
    def divergence_flagged(self) -> bool:
        return self.tail_bounded_below and self.mean_growing

    csv_header = ("t", "tail_product", "ci_lo", "ci_hi")

    def csv_rows(self):
        return zip(self.t, self.tail_product, self.tail_lo, self.tail_hi)


def _doubling_checkpoints(n: int) -> list[int]:
    cps = []
    c = n
    while c >= 1 and len(cps) < 12:
        cps.append(c)
        c //= 2
    return sorted(set(cps))


def expectation_lemma_check(samples, t_list=None, q0: float = 0.05, level: float = 0.95) -> ExpectationLemmaReport:
    """Empirical look at ``t * P(W > t)`` and at the prefix means of ``W``.

    Divergence is flagged when the lower confidence bound of ``t P(W > t)``
    stays at or above ``q0`` across the top decade of ``t`` and the running
    mean still grows over the last doubling of the sample count. By default
    ``t`` runs over two decades ending at the 100th largest sample.
    """
    w = np.asarray(samples, dtype=np.float64)
    if w.size < 2 or np.any(~(w > 0)):
        raise ValueError("samples must be positive (and at least two)")
    n = w.size
    if t_list is None:
        top = np.sort(w)[max(n - 100, 0)]
        t = np.geomspace(top / 100.0, top, 17) if np.isfinite(top) else np.array([])
    else:
        t = np.asarray(t_list, dtype=float)
    order = np.sort(w)
    exceed = n - np.searchsorted(order, t, side="right")
    _, lo, hi = wilson_interval(exceed, n, level)
    prod = t * exceed / n
    top_decade = t >= t.max() / 10.0 if t.size else np.zeros(0, bool)
    bounded = bool(t.size) and bool(np.all(t[top_decade] * lo[top_decade] >= q0))
    curve = running_mean_curve(w, _doubling_checkpoints(n))
    growing = len(curve.means) >= 2 and curve.means[-1] > curve.means[-2]
    return ExpectationLemmaReport(
        tuple(t.tolist()),
        tuple(prod.tolist()),
        tuple((t * lo).tolist()),
        tuple((t * hi).tolist()),
        curve,
        q0,
        bounded,
        bool(growing),
    )


@dataclass(frozen=True)
class ReciprocalMomentReport:
    order: int
    schedule: tuple[int, ...]
    means: tuple[float, ...]
    collisions: int
    factor: float

    @property
    def divergence_evidence(self) -> bool:
        return self.means[-1] > self.factor * self.means[0]

    csv_header = ("N", "running_mean")

    def csv_rows(self):
        return zip(self.schedule, self.means)


def reciprocal_moment_divergence(
    law: VectorLaw, x, m: int, schedule, seed, factor: float = 1.5, workers: int = 1
) -> ReciprocalMomentReport:
    """Running means of ``|X - x|**-m`` along an increasing sample schedule.

    A draw landing exactly on ``x`` is excluded and counted for laws without
    atoms; for laws with atoms it makes every later mean infinite.
    """
    if m < 1:
        raise ValueError("order must be >= 1")
    sched = tuple(int(s) for s in schedule)
    if any(b <= a for a, b in zip(sched, sched[1:])) or sched[0] < 1:
        raise ValueError("schedule must be strictly increasing")
    dist = _distances(law, x, sched[-1], seed, workers)
    hit = dist == 0.0
    means = []
    if law.has_atoms:
        first = int(np.argmax(hit)) if hit.any() else dist.size
        for s in sched:
            means.append(math.inf if s > first else math.fsum(dist[:s] ** -float(m)) / s)
    else:
        inv = np.zeros_like(dist)
        inv[~hit] = dist[~hit] ** -float(m)
        kept = np.cumsum(~hit)
        for s in sched:
            means.append(math.fsum(inv[:s]) / max(int(kept[s - 1]), 1))
    return ReciprocalMomentReport(m, sched, tuple(means), int(hit.sum()), factor)


@dataclass(frozen=True)
class DilationReport:
    c: float
    eps: tuple[float, ...]
    inside: tuple[int, ...]  # |X - x| < eps
    inside_image: tuple[int, ...]  # |d(X) - d(x)| < c eps
    violations: tuple[int, ...]  # image event without the original one
    n_samples: int
    order: int
    ratio_lower: tuple[float, ...] = field(default=())  # count_image / N / eps**order

    @property
    def total_violations(self) -> int:
        return sum(self.violations)

    csv_header = ("eps", "inside", "inside_image", "violations", "ratio_image")

    def csv_rows(self):
        return zip(self.eps, self.inside, self.inside_image, self.violations, self.ratio_lower)


def dilation_pushforward_check(law: VectorLaw, d, c: float, x, n_samples: int, seed, eps_list=None) -> DilationReport:
    """Count draws violating ``{|X-x| < eps} >= {|d(X)-d(x)| < c eps}``.

    ``d`` maps an ``(N, dim)`` array to ``(N, m)``. If ``d`` expands
    distances by at least ``c`` there are no violations, and the image ratios
    bound the order-``m`` mould ratios of ``X`` at ``x`` from below.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    x = _point(law, x)
    draws = law.draw(seed, np.arange(n_samples, dtype=np.uint64))
    image = np.atleast_2d(np.asarray(d(draws), dtype=float))
    if image.shape[0] != n_samples:
        image = image.T
    dx = np.atleast_1d(np.asarray(d(x[None, :]), dtype=float)).reshape(-1)
    order = dx.size
    dist = np.linalg.norm(draws - x, axis=1)
    ddist = np.linalg.norm(image - dx, axis=1)
    eps = np.asarray(eps_list if eps_list is not None else [1.0 / k for k in DEFAULT_K_GRID], dtype=float)
    inside, inside_img, viol = [], [], []
    for e in eps:
        a = dist < e
        b = ddist < c * e
        inside.append(int(a.sum()))
        inside_img.append(int(b.sum()))
        viol.append(int(np.count_nonzero(b & ~a)))
    ratio = tuple(ci / n_samples / e**order for ci, e in zip(inside_img, eps))
    return DilationReport(float(c), tuple(eps.tolist()), tuple(inside), tuple(inside_img), tuple(viol), n_samples, order, ratio)
