import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singmin_lab.ensembles import EnsembleSpec, Kind, sample_matrices
from singmin_lab.linalg import condition_number
from singmin_lab.theorems import (
    CdfEstimate,
    ProbeVerdict,
    alpha_moment_sweep,
    counterexample_suite,
    default_eps_grid,
    edelman_limit_cdf,
    estimate_sigma_min_cdf,
    kappa_divergence_diagnostic,
    matrix_statistics,
    power_identity_check,
    rademacher_enumeration,
    ratio_lower_bound_probe,
    sandwich_check,
    sandwich_pair,
)

GAUSS3 = EnsembleSpec(Kind.GAUSSIAN, 3)
RAD2 = EnsembleSpec(Kind.RADEMACHER, 2)
SHIFT2 = EnsembleSpec(Kind.SHIFTED, 2, shift=3.0)
GRID = (1e-9, 1e-3, 1e-2, 0.1, 0.5, 1.0)


def test_default_eps_grid():
    g = default_eps_grid()
    assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e-1) and g.size == 17
    assert default_eps_grid(100)[0] == pytest.approx(1e-4)


def test_cdf_rademacher_atom():
    cdf = estimate_sigma_min_cdf(RAD2, GRID, 20_000, seed=42)
    p, lo, hi = cdf.p_hat[0], cdf.ci_lo[0], cdf.ci_hi[0]
    assert lo <= 0.5 <= hi
    assert abs(p - 0.5) < 0.02


def test_cdf_shifted_zero_and_lowdim_one():
    shifted = estimate_sigma_min_cdf(SHIFT2, GRID, 20_000, seed=42)
    assert shifted.counts == (0,) * len(GRID)
    low = estimate_sigma_min_cdf(EnsembleSpec(Kind.LOWDIM, 3, m=1), GRID, 2000, seed=42)
    assert low.counts == (2000,) * len(GRID)


def test_cdf_invariants_and_csv():
    cdf = estimate_sigma_min_cdf(GAUSS3, default_eps_grid(), 20_000, seed=1)
    assert all(b >= a for a, b in zip(cdf.counts, cdf.counts[1:]))
    assert np.all((0 <= cdf.ci_lo) & (cdf.ci_lo <= cdf.p_hat) & (cdf.p_hat <= cdf.ci_hi) & (cdf.ci_hi <= 1))
    rows = list(cdf.csv_rows())
    assert len(rows) == 17 and rows[0][2] == 20_000


def test_cdf_grid_validation():
    with pytest.raises(ValueError):
        estimate_sigma_min_cdf(GAUSS3, (0.1, 0.01), 10, seed=0)
    with pytest.raises(ValueError):
        estimate_sigma_min_cdf(GAUSS3, (0.0, 0.01), 10, seed=0)


def test_cdf_transposition_invariant():
    grid = default_eps_grid()
    for spec in (GAUSS3, EnsembleSpec(Kind.CUBE, 4), RAD2):
        a = estimate_sigma_min_cdf(spec, grid, 20_000, seed=7)
        b = estimate_sigma_min_cdf(spec, grid, 20_000, seed=7, transpose=True)
        assert a.counts == b.counts


def test_probe_verdicts():
    grid = np.geomspace(1e-3, 5e-2, 12)
    gauss = ratio_lower_bound_probe(estimate_sigma_min_cdf(GAUSS3, grid, 200_000, seed=42))
    assert gauss.verdict is ProbeVerdict.LINEAR
    assert gauss.band <= 2.5
    shifted = ratio_lower_bound_probe(estimate_sigma_min_cdf(SHIFT2, grid, 10_000, seed=42))
    assert shifted.verdict is ProbeVerdict.NONE and set(shifted.ratio) == {0.0}
    rad = ratio_lower_bound_probe(estimate_sigma_min_cdf(RAD2, grid, 10_000, seed=42))
    assert rad.verdict is ProbeVerdict.ATOM and rad.band > 2.5


def test_probe_needs_span():
    cdf = CdfEstimate((0.01, 0.02, 0.03, 0.04), (1, 2, 3, 4), 100, 0.95)
    with pytest.raises(ValueError):
        ratio_lower_bound_probe(cdf)


def test_sandwich_pair_by_hand():
    sig, xy = sandwich_pair([[3.0, 4.0], [0.0, 1.0]])
    assert xy == 0.75
    assert sig == pytest.approx(math.sqrt(13 - 4 * math.sqrt(10)), rel=1e-12)
    assert sig <= xy


@pytest.mark.parametrize("spec", [GAUSS3, EnsembleSpec(Kind.SPHERE, 4), EnsembleSpec(Kind.LAPLACE, 3)], ids=lambda s: s.describe())
def test_sandwich_no_violations(spec):
    rep = sandwich_check(spec, default_eps_grid(), 20_000, seed=42)
    assert rep.violations == 0 and rep.worst_index is None
    assert rep.passed
    assert all(cs >= cx for cs, cx in zip(rep.count_sigma, rep.count_xy))


def test_sandwich_rejects_atomic():
    with pytest.raises(ValueError):
        sandwich_check(RAD2, GRID, 10, seed=0)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_per_sample_sandwich(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    sig, xy = sandwich_pair(a)
    assert sig <= xy + 1e-10 * np.linalg.norm(a, 2)


def test_power_identity_gaussian():
    rep = power_identity_check(GAUSS3, [1.0, 0.0, 0.0], 0.05, 200_000, seed=42)
    assert rep.analytic_single == pytest.approx(0.0398776, abs=1e-7)
    assert rep.agrees
    assert rep.analytic_in_ci


@pytest.mark.parametrize("eps, value", [(0.5, 0.0), (1.5, 1.0)])
def test_power_identity_rademacher_degenerate(eps, value):
    rep = power_identity_check(EnsembleSpec(Kind.RADEMACHER, 3), [1.0, 0.0, 0.0], eps, 5000, seed=0)
    assert rep.joint == value and rep.single == value
    assert rep.agrees


def test_kappa_diagnostic_shapes_and_controls():
    shifted = kappa_divergence_diagnostic(SHIFT2, np.inf, (25_000, 50_000), seed=42)
    assert shifted.infinite == 0
    assert shifted.kappa_last_doubling < 0.02
    rad = kappa_divergence_diagnostic(RAD2, 2, (1000, 20_000), seed=42)
    assert rad.infinite_fraction == pytest.approx(0.5, abs=0.02)
    gauss = kappa_divergence_diagnostic(EnsembleSpec(Kind.GAUSSIAN, 5), "inf", (1000, 10_000, 100_000), seed=42)
    assert gauss.hill is not None and 0.7 < gauss.hill.alpha_hat < 1.3
    assert gauss.lemma.tail_bounded_below


def test_kappa_norm_equivalence_of_infinite_verdicts():
    mats = sample_matrices(RAD2, 3, 0, 2000)
    verdicts = [np.isinf(condition_number(mats, p)) for p in (1, 2, np.inf)]
    assert np.array_equal(verdicts[0], verdicts[1]) and np.array_equal(verdicts[1], verdicts[2])
    stats = matrix_statistics(RAD2, 3, ("kappa_1", "kappa_2", "kappa_inf"), 0, 2000)
    assert np.array_equal(np.isinf(stats["kappa_1"]), np.isinf(stats["kappa_inf"]))
    assert np.array_equal(np.isinf(stats["kappa_2"]), np.isinf(stats["kappa_inf"]))


def test_alpha_sweep_small():
    rep = alpha_moment_sweep(EnsembleSpec(Kind.CUBE, 4), (0.0, 0.5), (10_000, 50_000, 100_000), seed=42)
    assert rep.means[0] == (1.0, 1.0, 1.0) and rep.drift[0] == 0.0
    assert rep.drift[1] < 0.05
    with pytest.raises(ValueError):
        alpha_moment_sweep(GAUSS3, (0.5,), (10, 20), seed=0)


def test_rademacher_enumeration_exact():
    e = rademacher_enumeration()
    assert e["matrices"] == 16
    assert e["p_singular"] == 0.5 and e["p_sigma_zero"] == 0.5 and e["p_equal_rows"] == 0.25


def test_counterexample_suite():
    rep = counterexample_suite(42, 20_000)
    assert rep.passed and not rep.offending
    names = [c[0] for c in rep.checks]
    assert "shifted_min_sigma_min" in names and "rademacher_mc_p_singular" in names


def test_edelman_limit_cdf():
    assert edelman_limit_cdf(0.0) == 0.0
    assert edelman_limit_cdf(2.0) == pytest.approx(1 - math.exp(-1 - math.sqrt(2)))


@pytest.mark.parametrize("engine", ["cdf", "sandwich", "kappa"])
def test_worker_determinism(engine):
    spec = EnsembleSpec(Kind.GAUSSIAN, 3)
    runs = []
    for workers in (1, 3):
        if engine == "cdf":
            runs.append(estimate_sigma_min_cdf(spec, default_eps_grid(), 70_000, seed=5, workers=workers))
        elif engine == "sandwich":
            runs.append(sandwich_check(spec, default_eps_grid(), 70_000, seed=5, workers=workers))
        else:
            runs.append(kappa_divergence_diagnostic(spec, 1, (1000, 70_000), seed=5, workers=workers))
    assert list(runs[0].csv_rows()) == list(runs[1].csv_rows())
