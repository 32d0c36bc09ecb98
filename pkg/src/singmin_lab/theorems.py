"""Monte Carlo engines for the least singular value and the condition number.

Every engine draws matrices ``0 .. N-1`` of an ensemble for a given seed,
reduces each matrix to a few scalars in fixed-size chunks, and only then
aggregates. Counts are integers and means use ``math.fsum``, so reports are
identical for any worker count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .ensembles import ALMOST_SURELY_INVERTIBLE, EnsembleSpec, Kind, sample_matrices, sample_matrix
from .moulds import ExpectationLemmaReport, expectation_lemma_check
from .parallel import chunk_for_dim, gather
from .stats import wilson_interval, z_value
from .tails import RunningMeanCurve, TailIndexEstimate, default_hill_k, hill_estimator, running_mean_curve

__all__ = [
    "default_eps_grid",
    "matrix_statistics",
    "CdfEstimate",
    "RatioCurve",
    "ProbeVerdict",
    "estimate_sigma_min_cdf",
    "ratio_lower_bound_probe",
    "sandwich_pair",
    "sandwich_check",
    "power_identity_check",
    "kappa_divergence_diagnostic",
    "alpha_moment_sweep",
    "counterexample_suite",
    "rademacher_enumeration",
    "edelman_ks_check",
]

SANDWICH_TOL = 1e-10


def default_eps_grid(n: int | None = None, lo: float = 1e-3, hi: float = 1e-1, per_decade: int = 8) -> np.ndarray:
    """Geometric grid, ``per_decade`` points per decade; scaled by ``n**-0.5`` when ``n`` is given."""
    count = int(round(per_decade * math.log10(hi / lo))) + 1
    grid = np.geomspace(lo, hi, count)
    return grid / math.sqrt(n) if n is not None else grid


def _check_grid(eps_grid) -> np.ndarray:
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) <= 0):
        raise ValueError("eps grid must be ascending and positive")
    return eps


# --- per-chunk reduction --------------------------------------------------


def matrix_statistics(spec: EnsembleSpec, seed, wanted: tuple[str, ...], start: int, stop: int) -> dict[str, np.ndarray]:
    """Per-matrix scalars for matrices ``start .. stop-1``.

    Recognised names: ``sigma_min``, ``sigma_max``, ``kappa_1``, ``kappa_2``,
    ``kappa_inf``, ``inv_sigma_min``, ``sigma_min_t`` (of the transpose),
    ``xy`` (``|X_n . Y|``) and ``degenerate`` (cross product vanished).
    """
    a = sample_matrices(spec, seed, start, stop)
    sv = linalg.svd_values(a)
    ok = linalg.invertible(sv)
    out: dict[str, np.ndarray] = {}
    for name in wanted:
        if name == "sigma_min":
            out[name] = sv[:, -1]
        elif name == "sigma_max":
            out[name] = sv[:, 0]
        elif name == "sigma_min_t":
            out[name] = linalg.svd_values(np.swapaxes(a, 1, 2))[:, -1]
        elif name == "inv_sigma_min":
            with np.errstate(divide="ignore"):
                out[name] = np.where(ok, 1.0 / sv[:, -1], np.inf)
        elif name == "kappa_2":
            out[name] = np.where(ok, sv[:, 0] / np.where(ok, sv[:, -1], 1.0), np.inf)
        elif name in ("kappa_1", "kappa_inf"):
            p = 1 if name == "kappa_1" else np.inf
            k = np.full(a.shape[0], np.inf)
            if ok.any():
                good = a[ok]
                k[ok] = linalg.op_norm(good, p) * linalg.op_norm(linalg._gauss_jordan(good), p)
            out[name] = k
        elif name in ("xy", "degenerate"):
            if "xy" not in out:
                y, good = linalg.y_vectors(a[:, :-1, :])
                out["xy"] = np.abs(np.einsum("bi,bi->b", a[:, -1, :], y))
                out["degenerate"] = ~good
        else:
            raise ValueError(f"unknown statistic {name!r}")
    return {k: out[k] for k in wanted}


def _collect(spec, seed, n_samples, wanted, workers):
    if n_samples < 1:
        raise ValueError("N must be >= 1")
    return gather(matrix_statistics, n_samples, (spec, seed, tuple(wanted)), workers, chunk_for_dim(spec.n))


# --- distribution of sigma_min --------------------------------------------


@dataclass(frozen=True)
class CdfEstimate:
    """Empirical ``P(sigma_min < eps)`` on a grid, with Wilson bounds."""

    eps_grid: tuple[float, ...]
    counts: tuple[int, ...]
    n_samples: int
    ci_level: float

    @property
    def p_hat(self) -> np.ndarray:
        return wilson_interval(self.counts, self.n_samples, self.ci_level)[0]

    @property
    def ci_lo(self) -> np.ndarray:
        return wilson_interval(self.counts, self.n_samples, self.ci_level)[1]

    @property
    def ci_hi(self) -> np.ndarray:
        return wilson_interval(self.counts, self.n_samples, self.ci_level)[2]

    csv_header = ("eps", "count", "N", "p_hat", "ci_lo", "ci_hi")

    def csv_rows(self):
        p, lo, hi = wilson_interval(self.counts, self.n_samples, self.ci_level)
        return zip(self.eps_grid, self.counts, [self.n_samples] * len(self.counts), p, lo, hi)


def _cdf_from_values(values, eps, level) -> CdfEstimate:
    s = np.sort(values)
    counts = np.searchsorted(s, eps, side="left")  # strict: values < eps
    return CdfEstimate(tuple(eps.tolist()), tuple(int(c) for c in counts), int(values.size), level)


def estimate_sigma_min_cdf(spec: EnsembleSpec, eps_grid, n_samples: int, seed, level: float = 0.95, workers: int = 1, transpose: bool = False) -> CdfEstimate:
    """Empirical distribution function of ``sigma_min`` on ``eps_grid``."""
    eps = _check_grid(eps_grid)
    key = "sigma_min_t" if transpose else "sigma_min"
    sigma = _collect(spec, seed, n_samples, (key,), workers)[key]
    return _cdf_from_values(sigma, eps, level)


class ProbeVerdict(str, enum.Enum):
    LINEAR = "LinearOrderEvidence"
    ATOM = "AtomAtZero"
    NONE = "NoEvidence"


@dataclass(frozen=True)
class RatioCurve:
    eps_grid: tuple[float, ...]
    ratio: tuple[float, ...]
    ratio_lo: tuple[float, ...]
    ratio_hi: tuple[float, ...]
    verdict: ProbeVerdict
    band: float  # max / min of the point estimates

    csv_header = ("eps", "ratio", "ratio_lo", "ratio_hi")

    def csv_rows(self):
        return zip(self.eps_grid, self.ratio, self.ratio_lo, self.ratio_hi)


def ratio_lower_bound_probe(cdf: CdfEstimate, r0: float = 0.0, bandwidth: float = 2.5) -> RatioCurve:
    """``P(sigma_min < eps) / eps`` along the grid, and what it suggests.

    ``LinearOrderEvidence``: every lower bound of the ratio exceeds ``r0`` and
    the point estimates stay within a factor ``bandwidth`` of each other.
    ``AtomAtZero``: the probability barely moves across the grid, so there is
    positive mass at zero. Anything else is ``NoEvidence``.
    """
    eps = np.asarray(cdf.eps_grid)
    if eps.size < 4 or math.log10(eps[-1] / eps[0]) < 1.5 - 1e-12:
        raise ValueError("probe needs >= 4 grid points spanning >= 1.5 decades")
    p, lo, hi = wilson_interval(cdf.counts, cdf.n_samples, cdf.ci_level)
    ratio, rlo, rhi = p / eps, lo / eps, hi / eps
    band = float(ratio.max() / ratio.min()) if ratio.min() > 0 else math.inf
    if cdf.counts[-1] == 0:
        verdict = ProbeVerdict.NONE
    elif lo[0] >= 0.5 * p[-1]:
        verdict = ProbeVerdict.ATOM
    elif np.all(rlo > r0) and band <= bandwidth:
        verdict = ProbeVerdict.LINEAR
    else:
        verdict = ProbeVerdict.NONE
    return RatioCurve(tuple(eps.tolist()), tuple(ratio.tolist()), tuple(rlo.tolist()), tuple(rhi.tolist()), verdict, band)


# --- the event chain sigma_min < eps  <=  |X_n . Y| < eps -------------------


def sandwich_pair(a) -> tuple[float, float]:
    """``(sigma_min(A), |A_n . Y|)`` with ``Y`` built from the first ``n-1`` rows."""
    a = linalg.as_matrix(a)
    y = linalg.y_vector(a[:-1])
    return linalg.sigma_min(a), float(abs(a[-1] @ y))


@dataclass(frozen=True)
class SandwichReport:
    eps_grid: tuple[float, ...]
    count_sigma: tuple[int, ...]
    count_xy: tuple[int, ...]
    slack: tuple[float, ...]
    n_samples: int
    violations: int
    degenerate: int
    worst_index: int | None
    ci_level: float

    @property
    def countwise_ok(self) -> bool:
        n = self.n_samples
        return all(cs / n >= cx / n - s for cs, cx, s in zip(self.count_sigma, self.count_xy, self.slack))

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.countwise_ok

    csv_header = ("eps", "count_sigma_min", "count_xy", "N", "slack", "violations", "degenerate")

    def csv_rows(self):
        for e, cs, cx, s in zip(self.eps_grid, self.count_sigma, self.count_xy, self.slack):
            yield (e, cs, cx, self.n_samples, s, self.violations, self.degenerate)


def sandwich_check(spec: EnsembleSpec, eps_grid, n_samples: int, seed, level: float = 0.95, workers: int = 1) -> SandwichReport:
    """Check ``sigma_min <= |X_n . Y|`` on every sample and the implied counts.

    The per-sample inequality follows from ``X Y = (0, ..., 0, X_n . Y)`` and
    ``|Y|_2 >= 1``; it is tested with tolerance ``1e-10 * sigma_max``.
    """
    if spec.kind not in ALMOST_SURELY_INVERTIBLE:
        raise ValueError(f"sandwich check needs an a.s. invertible ensemble, not {spec.kind.value}")
    eps = _check_grid(eps_grid)
    st = _collect(spec, seed, n_samples, ("sigma_min", "sigma_max", "xy", "degenerate"), workers)
    good = ~st["degenerate"]
    sig, xy = st["sigma_min"], st["xy"]
    excess = np.where(good, sig - xy - SANDWICH_TOL * st["sigma_max"], -np.inf)
    bad = excess > 0
    worst = int(np.argmax(excess)) if bad.any() else None
    cs = _cdf_from_values(sig, eps, level)
    cx = _cdf_from_values(np.where(good, xy, np.inf), eps, level)
    z = z_value(level)
    _, lo1, hi1 = wilson_interval(cs.counts, n_samples, level)
    _, lo2, hi2 = wilson_interval(cx.counts, n_samples, level)
    slack = 4.0 * np.hypot((hi1 - lo1) / 2.0, (hi2 - lo2) / 2.0) / z
    return SandwichReport(
        tuple(eps.tolist()),
        cs.counts,
        cx.counts,
        tuple(slack.tolist()),
        n_samples,
        int(bad.sum()),
        int((~good).sum()),
        worst,
        level,
    )


# --- i.i.d. power identity ---------------------------------------------------


def _power_chunk(spec, seed, y, eps, start, stop):
    a = sample_matrices(spec, seed, start, stop)
    inside = np.abs(a @ y) < eps
    return {"joint": np.all(inside[:, :-1], axis=1), "single": inside[:, -1]}


@dataclass(frozen=True)
class PowerIdentityReport:
    n: int
    eps: float
    n_samples: int
    joint_count: int
    single_count: int
    analytic_single: float | None
    ci_level: float

    @property
    def joint(self) -> float:
        return self.joint_count / self.n_samples

    @property
    def single(self) -> float:
        return self.single_count / self.n_samples

    @property
    def power(self) -> float:
        return self.single ** (self.n - 1)

    @property
    def combined_sigma(self) -> float:
        n, q, p, k = self.n_samples, self.joint, self.single, self.n - 1
        var_q = q * (1 - q) / n
        var_pow = (k * p ** (k - 1)) ** 2 * p * (1 - p) / n
        return math.sqrt(var_q + var_pow)

    @property
    def agrees(self) -> bool:
        return abs(self.joint - self.power) <= 4.0 * self.combined_sigma

    @property
    def single_ci(self) -> tuple[float, float]:
        _, lo, hi = wilson_interval(self.single_count, self.n_samples, self.ci_level)
        return float(lo), float(hi)

    @property
    def analytic_in_ci(self) -> bool | None:
        if self.analytic_single is None:
            return None
        lo, hi = self.single_ci
        return lo <= self.analytic_single <= hi

    @property
    def passed(self) -> bool:
        return self.agrees and self.analytic_in_ci is not False

    csv_header = ("n", "eps", "N", "joint_count", "single_count", "joint", "single_pow", "combined_sigma", "analytic_single")

    def csv_rows(self):
        a = self.analytic_single if self.analytic_single is not None else math.nan
        yield (self.n, self.eps, self.n_samples, self.joint_count, self.single_count, self.joint, self.power, self.combined_sigma, a)


def power_identity_check(spec: EnsembleSpec, y, eps: float, n_samples: int, seed, level: float = 0.95, workers: int = 1) -> PowerIdentityReport:
    """``P(all |X_j . y| < eps, j < n) = P(|X_n . y| < eps)**(n-1)`` for fixed ``y``.

    The joint event uses rows ``1..n-1`` and the single-row event row ``n``
    of the same matrices, so the two estimates are independent.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.n,):
        raise ValueError(f"y must have length {spec.n}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    st = gather(_power_chunk, n_samples, (spec, seed, y, float(eps)), workers, chunk_for_dim(spec.n))
    analytic = None
    if spec.kind is Kind.GAUSSIAN:
        analytic = math.erf(eps / (np.linalg.norm(y) * math.sqrt(2.0)))
    return PowerIdentityReport(spec.n, float(eps), n_samples, int(st["joint"].sum()), int(st["single"].sum()), analytic, level)


# --- condition number: divergence and moments ------------------------------


@dataclass(frozen=True)
class KappaDiagnostic:
    norm: str
    schedule: tuple[int, ...]
    kappa: RunningMeanCurve
    inv_sigma: RunningMeanCurve
    kappa_last_doubling: float
    inv_sigma_last_doubling: float
    infinite: int
    n_samples: int
    lemma: ExpectationLemmaReport | None
    hill: TailIndexEstimate | None

    @property
    def infinite_fraction(self) -> float:
        return self.infinite / self.n_samples

    csv_header = ("N", "mean_kappa", "mean_inv_sigma_min")

    def csv_rows(self):
        return zip(self.schedule, self.kappa.means, self.inv_sigma.means)


def _finite_running_mean(x, schedule) -> RunningMeanCurve:
    # infinite (singular) samples are excluded from the means and counted separately
    finite = np.isfinite(x)
    if finite.all():
        return running_mean_curve(x, schedule)
    kept = np.cumsum(finite)
    vals = np.where(finite, x, 0.0)
    means = tuple(math.fsum(vals[:s]) / kept[s - 1] if kept[s - 1] else math.nan for s in schedule)
    return RunningMeanCurve(tuple(schedule), means)


def _last_doubling(x, n) -> float:
    half = _finite_running_mean(x, (n // 2, n)).means
    return abs(half[1] - half[0]) / half[0]


def _norm_key(p) -> str:
    p = linalg._norm_kind(p)
    return "kappa_inf" if p == np.inf else f"kappa_{p}"


def _schedule(schedule) -> tuple[int, ...]:
    s = tuple(int(v) for v in schedule)
    if not s or s[0] < 2 or any(b <= a for a, b in zip(s, s[1:])):
        raise ValueError("N schedule must be strictly increasing and start at >= 2")
    return s


def kappa_divergence_diagnostic(spec: EnsembleSpec, p, schedule, seed, workers: int = 1) -> KappaDiagnostic:
    """Running means of ``kappa_p`` and ``1/sigma_min`` along ``schedule``,
    with the tail test of the expectation lemma and a Hill estimate."""
    sched = _schedule(schedule)
    key = _norm_key(p)
    st = _collect(spec, seed, sched[-1], (key, "inv_sigma_min"), workers)
    kappa, inv = st[key], st["inv_sigma_min"]
    finite = np.isfinite(inv)
    lemma = hill = None
    if finite.sum() >= 20:
        lemma = expectation_lemma_check(inv[finite])
        k = default_hill_k(int(finite.sum()))
        if k >= 10:
            try:
                hill = hill_estimator(inv[finite], k)
            except ValueError:
                hill = None
    return KappaDiagnostic(
        key.removeprefix("kappa_"),
        sched,
        _finite_running_mean(kappa, sched),
        _finite_running_mean(inv, sched),
        _last_doubling(kappa, sched[-1]),
        _last_doubling(inv, sched[-1]),
        int((~np.isfinite(kappa)).sum()),
        sched[-1],
        lemma,
        hill,
    )


@dataclass(frozen=True)
class AlphaSweepReport:
    alphas: tuple[float, ...]
    schedule: tuple[int, ...]
    means: tuple[tuple[float, ...], ...]  # [alpha][checkpoint]
    drift: tuple[float, ...]  # relative change over the last doubling, per alpha
    norm: str

    def curve(self, alpha: float) -> RunningMeanCurve:
        return RunningMeanCurve(self.schedule, self.means[self.alphas.index(alpha)])

    csv_header = ("alpha", "N", "running_mean", "last_doubling_drift")

    def csv_rows(self):
        for a, ms, d in zip(self.alphas, self.means, self.drift):
            for n, m in zip(self.schedule, ms):
                yield (a, n, m, d)


def alpha_moment_sweep(spec: EnsembleSpec, alpha_grid, schedule, seed, p=2, workers: int = 1) -> AlphaSweepReport:
    """Running means of ``kappa**alpha`` for each alpha and their drift over
    the last doubling of the sample count (``N/2 -> N``)."""
    if not spec.log_concave:
        raise ValueError(f"alpha sweep needs a log-concave ensemble, not {spec.kind.value}")
    alphas = tuple(float(a) for a in alpha_grid)
    if any(a < 0 for a in alphas):
        raise ValueError("alpha must be >= 0")
    sched = _schedule(schedule)
    key = _norm_key(p)
    kappa = _collect(spec, seed, sched[-1], (key,), workers)[key]
    n = sched[-1]
    means, drift = [], []
    for a in alphas:
        if a == 0:
            means.append(tuple(1.0 for _ in sched))
            drift.append(0.0)
            continue
        powered = kappa**a
        means.append(running_mean_curve(powered, sched).means)
        drift.append(_last_doubling(powered, n))
    return AlphaSweepReport(alphas, sched, tuple(means), tuple(drift), key.removeprefix("kappa_"))


# --- the two counterexamples -----------------------------------------------


def rademacher_enumeration() -> dict[str, float]:
    """Exact values for 2x2 sign matrices: P(singular) and P(X1 = X2)."""
    signs = (-1.0, 1.0)
    rows = [(a, b) for a in signs for b in signs]
    mats = np.array([[r1, r2] for r1 in rows for r2 in rows])
    singular = int(np.count_nonzero(linalg.det(mats) == 0.0))
    zero_sigma = int(np.count_nonzero(linalg.svd_values(mats)[:, -1] == 0.0))
    equal = sum(r1 == r2 for r1 in rows for r2 in rows)
    return {
        "matrices": len(mats),
        "p_singular": singular / len(mats),
        "p_sigma_zero": zero_sigma / len(mats),
        "p_equal_rows": equal / len(mats),
    }


@dataclass
class CounterexampleReport:
    checks: list[tuple[str, float, str, bool]] = field(default_factory=list)
    offending: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.checks)

    csv_header = ("check", "value", "expected", "passed")

    def csv_rows(self):
        for name, value, expected, ok in self.checks:
            yield (name, value, expected, int(ok))


def counterexample_suite(seed, n_samples: int = 10**5, level: float = 0.99, workers: int = 1) -> CounterexampleReport:
    """(a) shifted 2x2 matrices have ``sigma_min > 1``; (b) 2x2 sign matrices are
    singular with probability 1/2 >= P(X1 = X2) = 1/4."""
    rep = CounterexampleReport()
    shifted = EnsembleSpec(Kind.SHIFTED, 2, shift=3.0)
    sig = _collect(shifted, seed, n_samples, ("sigma_min",), workers)["sigma_min"]
    low = float(sig.min())
    rep.checks.append(("shifted_min_sigma_min", low, "> 1", low > 1.0))
    for i in np.flatnonzero(sig <= 1.0)[:10]:
        rep.offending.append({"ensemble": shifted.describe(), "seed": int(seed), "matrix_index": int(i), "matrix": sample_matrix(shifted, seed, int(i)).tolist()})

    exact = rademacher_enumeration()
    rep.checks.append(("rademacher_exact_p_singular", exact["p_singular"], "0.5", exact["p_singular"] == 0.5 and exact["p_sigma_zero"] == 0.5))
    rep.checks.append(("rademacher_exact_p_equal_rows", exact["p_equal_rows"], "0.25", exact["p_equal_rows"] == 0.25))
    rep.checks.append(("rademacher_bound_holds", exact["p_singular"] - exact["p_equal_rows"], ">= 0", exact["p_singular"] >= exact["p_equal_rows"]))
    rad = EnsembleSpec(Kind.RADEMACHER, 2)
    sv = _collect(rad, seed, n_samples, ("sigma_min", "sigma_max"), workers)
    singular = int(np.count_nonzero(~linalg.invertible(np.stack([sv["sigma_max"], sv["sigma_min"]], axis=1))))
    p, lo, hi = wilson_interval(singular, n_samples, level)
    rep.checks.append(("rademacher_mc_p_singular", float(p), f"0.5 in [{lo:.6f}, {hi:.6f}]", bool(lo <= 0.5 <= hi)))
    return rep


# --- reference check against the Gaussian limit law -------------------------


def _lapack_sigma_min_chunk(spec, seed, start, stop):
    a = sample_matrices(spec, seed, start, stop)
    return {"sigma_min": np.linalg.svd(a, compute_uv=False)[:, -1]}


@dataclass(frozen=True)
class EdelmanReport:
    n: int
    n_samples: int
    ks_distance: float
    threshold: float
    quantiles: tuple[tuple[float, float, float], ...]  # (x, empirical cdf, limit cdf)

    @property
    def passed(self) -> bool:
        return self.ks_distance < self.threshold

    csv_header = ("x", "empirical_cdf", "limit_cdf")

    def csv_rows(self):
        return iter(self.quantiles)


def edelman_limit_cdf(x):
    x = np.asarray(x, dtype=float)
    return 1.0 - np.exp(-x / 2.0 - np.sqrt(x))


def edelman_ks_check(n: int = 100, n_samples: int = 20_000, seed=42, threshold: float = 0.03, workers: int = 1) -> EdelmanReport:
    """KS distance between ``n sigma_min^2`` of Gaussian matrices and
    ``1 - exp(-x/2 - sqrt(x))``.

    ``n`` exceeds the Jacobi routine's range, so singular values come from
    LAPACK here.
    """
    from scipy.stats import kstest

    spec = EnsembleSpec(Kind.GAUSSIAN, n)
    sig = gather(_lapack_sigma_min_chunk, n_samples, (spec, seed), workers, chunk_for_dim(n))["sigma_min"]
    x = n * sig**2
    stat = float(kstest(x, edelman_limit_cdf).statistic)
    grid = np.quantile(x, np.linspace(0.05, 0.95, 19))
    emp = np.searchsorted(np.sort(x), grid, side="right") / x.size
    rows = tuple(zip(grid.tolist(), emp.tolist(), edelman_limit_cdf(grid).tolist()))
    return EdelmanReport(n, n_samples, stat, threshold, rows)
