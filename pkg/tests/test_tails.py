import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singmin_lab.tails import default_hill_k, empirical_moment, hill_estimator, running_mean_curve


def _pareto(alpha, n, seed=0):
    u = np.random.default_rng(seed).random(n)
    return (1.0 - u) ** (-1.0 / alpha)


def test_hill_pareto_one():
    est = hill_estimator(_pareto(1.0, 100_000), k=316)
    assert 0.85 <= est.alpha_hat <= 1.15
    assert est.k_used == 316
    assert est.ci[0] < est.alpha_hat < est.ci[1]
    assert est.ci == pytest.approx((est.alpha_hat * (1 - 1.96 / math.sqrt(316)), est.alpha_hat * (1 + 1.96 / math.sqrt(316))))


def test_hill_pareto_two():
    assert 1.7 <= hill_estimator(_pareto(2.0, 100_000, 1), k=316).alpha_hat <= 2.3


def test_hill_exponential_is_light():
    x = np.random.default_rng(2).exponential(size=100_000)
    assert hill_estimator(x, k=316).alpha_hat >= 3


def test_hill_default_k():
    assert default_hill_k(100_000) == 316
    assert hill_estimator(_pareto(1.0, 100_000)).k_used == 316


@pytest.mark.parametrize("k", [5, 60])
def test_hill_k_range(k):
    with pytest.raises(ValueError):
        hill_estimator(_pareto(1.0, 100), k=k)


def test_hill_rejects_ties_and_nonpositive():
    with pytest.raises(ValueError):
        hill_estimator(np.ones(1000), k=20)
    with pytest.raises(ValueError):
        hill_estimator(np.r_[_pareto(1.0, 999), 0.0], k=20)


@given(st.floats(1e-3, 1e3))
@settings(max_examples=50, deadline=None)
def test_hill_scale_invariance(c):
    x = _pareto(1.5, 5000, 3)
    c = 2.0 ** round(math.log2(c))  # powers of two scale exactly
    assert hill_estimator(c * x).alpha_hat == hill_estimator(x).alpha_hat


def test_running_mean_examples():
    curve = running_mean_curve(np.full(1000, 2.5), [10, 100, 1000])
    assert curve.means == (2.5, 2.5, 2.5)
    bounded = np.random.default_rng(4).random(200_000)
    c = running_mean_curve(bounded, [100_000, 200_000])
    assert abs(c.means[1] / c.means[0] - 1) < 0.01


def test_running_mean_reciprocal_uniform_growth():
    # E[min(1/U, t)] = 1 + ln t; a single path is dominated by its largest draw,
    # so compare medians over independent replicates
    w = 1.0 / np.random.default_rng(5).random((200, 100_000))
    early = np.median([running_mean_curve(r, [1000]).final for r in w])
    late = np.median([running_mean_curve(r, [100_000]).final for r in w])
    assert late / early == pytest.approx((1 + math.log(1e5)) / (1 + math.log(1e3)), rel=0.1)


def test_running_mean_checkpoints_validated():
    with pytest.raises(ValueError):
        running_mean_curve(np.ones(10), [5, 3])
    with pytest.raises(ValueError):
        running_mean_curve(np.ones(10), [11])


def test_empirical_moment_examples():
    assert empirical_moment([3.0, 7.0], 0.0) == 1.0
    assert empirical_moment([1.0, 4.0, 9.0], 0.5) == 2.0
    assert empirical_moment([1.0, math.inf], 0.5) == math.inf


@given(st.lists(st.floats(1e-3, 1e6), min_size=1, max_size=200))
def test_running_mean_final_equals_first_moment(xs):
    assert running_mean_curve(xs, [len(xs)]).final == empirical_moment(xs, 1.0)


@given(st.lists(st.floats(1.0, 1e6), min_size=1, max_size=100), st.floats(0, 2), st.floats(0, 2))
def test_moment_monotone_in_alpha(xs, a, b):
    lo, hi = sorted((a, b))
    assert empirical_moment(xs, lo) <= empirical_moment(xs, hi) * (1 + 1e-12)
