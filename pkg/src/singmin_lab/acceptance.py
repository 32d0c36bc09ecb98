"""Acceptance criteria of the laboratory, one function per criterion.

Each criterion returns a :class:`CriterionResult` carrying its verdict, a
one-line summary and the CSV text of the underlying report. The CSV text is
what the determinism criterion compares across worker counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .ensembles import EnsembleSpec, Kind, sample_matrices
from .moulds import UniformBox, mould_ratio_sequence, reciprocal_moment_divergence
from .oracles import bisection_singular_values
from .report import csv_text
from .rng import DOMAIN_LAW, uniforms
from .tails import hill_estimator
from .theorems import (
    alpha_moment_sweep,
    counterexample_suite,
    default_eps_grid,
    edelman_ks_check,
    estimate_sigma_min_cdf,
    kappa_divergence_diagnostic,
    power_identity_check,
    rademacher_enumeration,
    ratio_lower_bound_probe,
    sandwich_check,
    _collect,
)

__all__ = ["CriterionResult", "CRITERIA", "criterion_12", "run_all", "all_passed", "pareto_samples", "SEED"]

SEED = 42


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    csv: str
    advisory: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("ADVISORY-FAIL" if self.advisory else "FAIL")
        return f"[{tag}] criterion {self.number:2d} {self.title}: {self.detail}"


def _rows_csv(rows, header=("quantity", "value", "target", "passed")):
    return csv_text(header, rows)


def criterion_1(workers: int = 1) -> CriterionResult:
    exact = rademacher_enumeration()
    rep = counterexample_suite(SEED, 10**5, level=0.99, workers=workers)
    checks = [c for c in rep.checks if c[0].startswith("rademacher")]
    ok = all(c[3] for c in checks) and exact["p_singular"] == 0.5 and exact["p_equal_rows"] == 0.25
    mc = next(c for c in checks if c[0] == "rademacher_mc_p_singular")
    detail = f"exact P(singular)={exact['p_singular']}, P(X1=X2)={exact['p_equal_rows']}, MC={mc[1]:.5f} ({mc[2]})"
    return CriterionResult(1, "Rademacher enumeration oracle", ok, detail, csv_text(rep.csv_header, [r for r in rep.csv_rows() if r[0].startswith("rademacher")]))


def criterion_2(workers: int = 1) -> CriterionResult:
    rep = counterexample_suite(SEED, 10**5, level=0.99, workers=workers)
    check = next(c for c in rep.checks if c[0] == "shifted_min_sigma_min")
    detail = f"min sigma_min over 1e5 shifted 2x2 samples = {check[1]:.6f}, offending samples: {len(rep.offending)}"
    return CriterionResult(2, "shifted counterexample", check[3] and not rep.offending, detail, csv_text(rep.csv_header, [r for r in rep.csv_rows() if r[0].startswith("shifted")]))


def criterion_3(workers: int = 1) -> CriterionResult:
    eps = default_eps_grid(lo=1e-3, hi=5e-2)
    cdf = estimate_sigma_min_cdf(EnsembleSpec(Kind.GAUSSIAN, 3), eps, 10**6, SEED, workers=workers)
    curve = ratio_lower_bound_probe(cdf, r0=0.0, bandwidth=2.5)
    ok = all(lo > 0 for lo in curve.ratio_lo) and curve.band <= 2.5
    detail = f"min ratio lower CI={min(curve.ratio_lo):.4f}, band max/min={curve.band:.4f} (<= 2.5), verdict {curve.verdict.value}"
    rows = [(e, c, r, lo, hi) for (e, c, *_), r, lo, hi in zip(cdf.csv_rows(), curve.ratio, curve.ratio_lo, curve.ratio_hi)]
    return CriterionResult(3, "linear-order band", ok, detail, csv_text(("eps", "count", "ratio", "ratio_lo", "ratio_hi"), rows))


def criterion_4(workers: int = 1) -> CriterionResult:
    parts, text, ok = [], "", True
    for spec in (EnsembleSpec(Kind.GAUSSIAN, 3), EnsembleSpec(Kind.SPHERE, 4)):
        rep = sandwich_check(spec, default_eps_grid(), 10**5, SEED, workers=workers)
        ok &= rep.violations == 0 and rep.passed
        parts.append(f"{spec.describe()}: {rep.violations} violations, {rep.degenerate} degenerate")
        text += f"# {spec.describe()}\n" + csv_text(rep.csv_header, rep.csv_rows())
    return CriterionResult(4, "per-sample sandwich", ok, "; ".join(parts), text)


def criterion_5(workers: int = 1) -> CriterionResult:
    rep = power_identity_check(EnsembleSpec(Kind.GAUSSIAN, 3), [1.0, 0.0, 0.0], 0.05, 10**6, SEED, workers=workers)
    lo, hi = rep.single_ci
    ok = rep.agrees and rep.analytic_in_ci is True and abs(rep.analytic_single - 0.0398776) < 5e-8
    detail = (
        f"joint={rep.joint:.6f}, single^2={rep.power:.6f}, |diff|/sigma={abs(rep.joint - rep.power) / rep.combined_sigma:.2f} (<= 4); "
        f"single={rep.single:.6f} in [{lo:.6f}, {hi:.6f}] vs analytic {rep.analytic_single:.7f}"
    )
    return CriterionResult(5, "i.i.d. power identity", ok, detail, csv_text(rep.csv_header, rep.csv_rows()))


def criterion_6(workers: int = 1) -> CriterionResult:
    sched = (10**4, 10**5, 10**6)
    g = kappa_divergence_diagnostic(EnsembleSpec(Kind.GAUSSIAN, 5), "inf", sched, SEED, workers=workers)
    s = kappa_divergence_diagnostic(EnsembleSpec(Kind.SHIFTED, 2), "inf", sched, SEED, workers=workers)
    grow = all(c.strictly_increasing() and c.growth() > 0.30 for c in (g.kappa, g.inv_sigma))
    stable = s.kappa_last_doubling < 0.02 and s.inv_sigma_last_doubling < 0.02
    detail = (
        f"gaussian n=5: kappa_inf growth {g.kappa.growth():.1%}, 1/sigma_min growth {g.inv_sigma.growth():.1%} "
        f"(increasing: {g.kappa.strictly_increasing()}/{g.inv_sigma.strictly_increasing()}); "
        f"shifted control last-doubling drift {s.kappa_last_doubling:.3%} / {s.inv_sigma_last_doubling:.3%}"
    )
    text = "# gaussian n=5\n" + csv_text(g.csv_header, g.csv_rows()) + "# shifted n=2\n" + csv_text(s.csv_header, s.csv_rows())
    return CriterionResult(6, "divergence diagnostics", grow and stable, detail, text)


def pareto_samples(alpha: float, n_samples: int, seed=SEED, stream: int = 0) -> np.ndarray:
    u = uniforms(seed, np.arange(n_samples, dtype=np.uint64), stream, 1, DOMAIN_LAW)[:, 0]
    return u ** (-1.0 / alpha)


def criterion_7(workers: int = 1) -> CriterionResult:
    inv = _collect(EnsembleSpec(Kind.GAUSSIAN, 5), SEED, 10**5, ("inv_sigma_min",), workers)["inv_sigma_min"]
    h = hill_estimator(inv, 316)
    cal = {a: hill_estimator(pareto_samples(a, 10**5, SEED, stream=int(a)), 316) for a in (1.0, 2.0)}
    ok = 0.8 <= h.alpha_hat <= 1.25 and all(abs(e.alpha_hat - a) <= 0.15 * a for a, e in cal.items())
    detail = f"1/sigma_min tail index {h.alpha_hat:.4f} in [0.8, 1.25]; Pareto(1) -> {cal[1.0].alpha_hat:.4f}, Pareto(2) -> {cal[2.0].alpha_hat:.4f} (+-15%)"
    rows = [("inv_sigma_min", h.alpha_hat, h.k_used, *h.ci)] + [(f"pareto_{a:g}", e.alpha_hat, e.k_used, *e.ci) for a, e in cal.items()]
    return CriterionResult(7, "tail index ~ 1", ok, detail, csv_text(("sample", "alpha_hat", "k", "ci_lo", "ci_hi"), rows))


def criterion_8(workers: int = 1) -> CriterionResult:
    rep = alpha_moment_sweep(EnsembleSpec(Kind.CUBE, 4), (0.0, 0.25, 0.5, 0.7, 1.0, 1.2), (10**4, 10**5, 5 * 10**5, 10**6), SEED, workers=workers)
    d = dict(zip(rep.alphas, rep.drift))
    inc = rep.curve(1.0).strictly_increasing()
    ok = d[0.5] < 0.05 and d[1.0] > 0.20 and inc
    detail = f"drift(0.5)={d[0.5]:.3%} (< 5%), drift(1.0)={d[1.0]:.3%} (> 20%), alpha=1 means {['%.2f' % m for m in rep.curve(1.0).means]} increasing={inc}"
    return CriterionResult(8, "alpha-moment dichotomy", ok, detail, csv_text(rep.csv_header, rep.csv_rows()))


def criterion_9(workers: int = 1) -> CriterionResult:
    seq = mould_ratio_sequence(UniformBox((0.0,), (1.0,)), [0.5], 1, (64, 128, 256), 10**6, SEED, workers=workers)
    calib = all(abs(r - 2.0) <= 0.1 for r in seq.ratio)
    rec = reciprocal_moment_divergence(UniformBox((0.0, 0.0), (1.0, 1.0)), [0.5, 0.5], 2, (10**4, 10**5, 10**6), SEED, workers=workers)
    growth = rec.means[-1] / rec.means[0] - 1.0
    ok = calib and growth > 0.5
    detail = f"ratios {['%.4f' % r for r in seq.ratio]} (2 +- 0.1); reciprocal 2-moment means {['%.2f' % m for m in rec.means]}, growth {growth:.1%} (> 50%)"
    text = csv_text(seq.csv_header, seq.csv_rows()) + csv_text(rec.csv_header, rec.csv_rows())
    return CriterionResult(9, "mould calibration + reciprocal divergence", ok, detail, text)


def criterion_10(workers: int = 1) -> CriterionResult:
    worst_svd = worst_orth = worst_dual = 0.0
    count = 0
    for n in range(2, 7):
        mats = sample_matrices(EnsembleSpec(Kind.GAUSSIAN, n), SEED, 0, 200)
        sv = linalg.svd_values(mats)
        for a, s in zip(mats, sv):
            ref = bisection_singular_values(a)
            worst_svd = max(worst_svd, float(np.max(np.abs(s - ref) / ref)))
            w = linalg.cross_product(a[:-1])
            res = np.abs(a[:-1] @ w) / (np.linalg.norm(a[:-1], axis=1) * np.linalg.norm(w))
            worst_orth = max(worst_orth, float(res.max()))
            if linalg.invertible(s):
                dual = s[-1] * linalg.svd_values(linalg.inverse(a))[0]
                worst_dual = max(worst_dual, abs(dual - 1.0))
            count += 1
    ok = worst_svd <= 1e-9 and worst_orth < 1e-10 and worst_dual <= 1e-8
    detail = f"{count} matrices: svd rel err {worst_svd:.2e} (<= 1e-9), orthogonality {worst_orth:.2e} (< 1e-10), duality {worst_dual:.2e} (<= 1e-8)"
    rows = [("svd_vs_bisection", worst_svd, 1e-9, worst_svd <= 1e-9), ("cross_orthogonality", worst_orth, 1e-10, worst_orth < 1e-10), ("sigma_min_duality", worst_dual, 1e-8, worst_dual <= 1e-8)]
    return CriterionResult(10, "linalg oracle equivalence", ok, detail, _rows_csv(rows))


def criterion_11(workers: int = 1) -> CriterionResult:
    rep = edelman_ks_check(100, 20_000, SEED, 0.03, workers=workers)
    detail = f"KS distance of n*sigma_min^2 (n=100, N=2e4) to 1-exp(-x/2-sqrt x): {rep.ks_distance:.4f} (< 0.03)"
    return CriterionResult(11, "Edelman limit law (advisory)", rep.passed, detail, csv_text(rep.csv_header, rep.csv_rows()), advisory=True)


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
}


def criterion_12(baseline: dict[int, CriterionResult] | None = None, worker_counts=(4, 8)) -> CriterionResult:
    """Re-run every criterion with more workers and compare CSV bytes."""
    if baseline is None:
        baseline = {k: f(1) for k, f in CRITERIA.items()}
    mismatches = []
    for w in worker_counts:
        for k, f in CRITERIA.items():
            if f(w).csv != baseline[k].csv:
                mismatches.append((k, w))
    detail = "byte-identical CSV for workers 1/" + "/".join(map(str, worker_counts)) if not mismatches else f"mismatches (criterion, workers): {mismatches}"
    rows = [(k, w, (k, w) not in mismatches) for w in worker_counts for k in CRITERIA]
    return CriterionResult(12, "worker-count determinism", not mismatches, detail, csv_text(("criterion", "workers", "identical"), rows))


def run_all(workers: int = 1, echo=print) -> list[CriterionResult]:
    results = {}
    for k, f in CRITERIA.items():
        results[k] = f(workers)
        if echo:
            echo(results[k].line())
    results[12] = criterion_12(results, tuple(w for w in (1, 4, 8) if w != workers))
    if echo:
        echo(results[12].line())
    return [results[k] for k in sorted(results)]


def all_passed(results) -> bool:
    return all(r.passed for r in results if not r.advisory)

