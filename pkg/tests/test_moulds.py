import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singmin_lab.moulds import (
    AtomMixture,
    DiagonalSegment,
    PointMass,
    UniformBox,
    Verdict,
    dilation_pushforward_check,
    expectation_lemma_check,
    membership_survey,
    membership_verdict,
    mould_ratio_sequence,
    reciprocal_moment_divergence,
    small_ball_estimate,
)

UNIT = UniformBox((0.0,), (1.0,))
SQUARE = UniformBox((0.0, 0.0), (1.0, 1.0))
KS = (64, 128, 256)


def test_small_ball_uniform_scalar():
    law = UniformBox((-math.sqrt(3),), (math.sqrt(3),))
    est = small_ball_estimate(law, [0.0], 0.1, 10**6, seed=42)
    truth = 0.1 / math.sqrt(3)
    assert est.ci[0] <= truth <= est.ci[1]


def test_small_ball_atom_and_outside():
    assert small_ball_estimate(PointMass((2.0, -1.0)), [2.0, -1.0], 1e-9, 100, seed=0).p_hat == 1.0
    assert small_ball_estimate(SQUARE, [3.0, 3.0], 1.0, 10_000, seed=0).count == 0


def test_small_ball_monotone_in_eps():
    counts = [small_ball_estimate(SQUARE, [0.3, 0.6], e, 20_000, seed=5).count for e in (0.01, 0.05, 0.1, 0.5)]
    assert counts == sorted(counts)


def test_small_ball_rejects_bad_eps():
    with pytest.raises(ValueError):
        small_ball_estimate(UNIT, [0.5], 0.0, 10, seed=0)


def test_ratio_sequence_unit_interval():
    seq = mould_ratio_sequence(UNIT, [0.5], 1, KS, 10**6, seed=42)
    assert seq.ks == KS
    for r, lo, hi in zip(seq.ratio, seq.ci_lo, seq.ci_hi):
        assert abs(r - 2.0) < 0.1
        assert lo <= 2.0 <= hi
    assert all(h >= 0 for h in seq.half_width)
    rows = list(seq.csv_rows())
    assert rows[0][:4] == (64, 1 / 64, seq.counts[0], 10**6)
    assert membership_verdict(seq, 0.5) is Verdict.MEMBER


def test_ratio_sequence_order_zero_non_member():
    # ratio = P(|X - x| < 1/k) = 2/k falls under the threshold
    seq = mould_ratio_sequence(UNIT, [0.5], 0, (16, 32, 64, 128, 256), 10**6, seed=42)
    assert membership_verdict(seq, 0.5) is Verdict.NON_MEMBER


def test_ratio_sequence_atom_diverges():
    law = AtomMixture((0.5,), 0.3, UNIT)
    seq = mould_ratio_sequence(law, [0.5], 2, (4, 16, 64, 256), 100_000, seed=3)
    p_lo = 0.3 - 0.01
    assert all(r >= k**2 * p_lo for k, r in zip(seq.ks, seq.ratio))
    assert all(b > a for a, b in zip(seq.ratio, seq.ratio[1:]))


def test_ratio_sequence_outside_support():
    seq = mould_ratio_sequence(SQUARE, [2.0, 2.0], 2, (2, 4, 8), 10_000, seed=0)
    assert seq.ratio == (0.0, 0.0, 0.0)
    assert membership_verdict(seq, 0.1) is Verdict.NON_MEMBER


def test_verdict_inconclusive_and_short():
    seq = mould_ratio_sequence(UNIT, [0.5], 1, (64, 128, 256), 50, seed=0)
    assert membership_verdict(seq, 0.5) is Verdict.INCONCLUSIVE
    with pytest.raises(ValueError):
        membership_verdict(mould_ratio_sequence(UNIT, [0.5], 1, (4, 8), 100, seed=0), 0.5)


def test_default_grid_is_capped():
    seq = mould_ratio_sequence(SQUARE, [0.5, 0.5], 2, None, 10_000, seed=0)
    assert seq.ks[0] == 4 and len(seq.ks) >= 3
    assert all(c >= 20 for c in seq.counts) or len(seq.ks) == 3


def test_sequence_validation():
    with pytest.raises(ValueError):
        mould_ratio_sequence(UNIT, [0.5], 1, (8, 4), 100, seed=0)
    with pytest.raises(ValueError):
        mould_ratio_sequence(UNIT, [0.5], -1, (4, 8), 100, seed=0)
    with pytest.raises(ValueError):
        mould_ratio_sequence(UNIT, [0.5, 0.5], 1, (4, 8), 100, seed=0)


@given(st.integers(0, 3), st.integers(0, 3), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=20, deadline=None)
def test_nesting_orders(l, extra, a, b):
    # k**m P >= k**l P whenever m >= l and k >= 1
    lo = mould_ratio_sequence(SQUARE, [a, b], l, (1, 2, 4, 8), 5000, seed=7)
    hi = mould_ratio_sequence(SQUARE, [a, b], l + extra, (1, 2, 4, 8), 5000, seed=7)
    assert all(h >= r for h, r in zip(hi.ratio, lo.ratio))


def test_full_dimensional_mould_covers_sampled_points():
    points = SQUARE.draw(123, np.arange(100, dtype=np.uint64))
    survey = membership_survey(SQUARE, points, 2, (8, 16, 32), 0.1, 10**6, seed=42)
    assert all(v is Verdict.MEMBER for _, v in survey)


def test_determinism():
    a = mould_ratio_sequence(SQUARE, [0.2, 0.7], 2, (4, 8, 16), 100_000, seed=11, workers=1)
    b = mould_ratio_sequence(SQUARE, [0.2, 0.7], 2, (4, 8, 16), 100_000, seed=11, workers=3)
    assert a == b


# --- expectation lemma -------------------------------------------------------


def test_lemma_reciprocal_uniform_flagged():
    w = 1.0 / np.random.default_rng(0).random(10**6)
    rep = expectation_lemma_check(w, t_list=np.geomspace(10, 1000, 9))
    assert rep.tail_bounded_below
    assert np.allclose(rep.tail_product, 1.0, atol=0.15)


def test_lemma_default_grid_on_heavy_tails():
    rng = np.random.default_rng(1)
    assert expectation_lemma_check(1.0 / rng.random(10**5) ** 2).tail_bounded_below
    rep = expectation_lemma_check(1.0 / rng.random(10**5))
    assert rep.tail_bounded_below
    assert len(rep.t) == 17


def test_lemma_bounded_not_flagged():
    u = np.random.default_rng(2).random(10**5)
    rep = expectation_lemma_check(u, t_list=[0.5, 0.9, 0.99])
    assert not rep.divergence_flagged
    assert rep.tail_product[-1] < 0.05


def test_lemma_rejects_nonpositive():
    with pytest.raises(ValueError):
        expectation_lemma_check([1.0, 0.0, 2.0])


# --- reciprocal moments --------------------------------------------------------


def test_reciprocal_moment_square_orders():
    rep2 = reciprocal_moment_divergence(SQUARE, [0.5, 0.5], 2, (10**4, 10**5, 10**6), seed=42)
    assert rep2.collisions == 0
    assert len(rep2.means) == 3
    rep1 = reciprocal_moment_divergence(SQUARE, [0.5, 0.5], 1, (10**5, 2 * 10**5, 4 * 10**5), seed=42)
    # E|X - c|^-1 over the unit square is finite: 4 ln(1 + sqrt 2)
    assert abs(rep1.means[-1] / rep1.means[-2] - 1) < 0.02
    assert rep1.means[-1] == pytest.approx(4 * math.log(1 + math.sqrt(2)), rel=0.03)


def test_reciprocal_moment_atom_is_infinite():
    law = AtomMixture((0.5, 0.5), 0.1, SQUARE)
    rep = reciprocal_moment_divergence(law, [0.5, 0.5], 2, (100, 1000), seed=0)
    assert rep.means[-1] == math.inf
    assert rep.collisions > 0


def test_reciprocal_moment_validation():
    with pytest.raises(ValueError):
        reciprocal_moment_divergence(SQUARE, [0.5, 0.5], 2, (100, 50), seed=0)
    with pytest.raises(ValueError):
        reciprocal_moment_divergence(SQUARE, [0.5, 0.5], 0, (10, 50), seed=0)


# --- dilations -------------------------------------------------------------------


def test_dilation_projection_of_diagonal():
    seg = DiagonalSegment(3)
    rep = dilation_pushforward_check(seg, lambda v: v[:, :1], 1 / math.sqrt(3), [0.5] * 3, 10**5, seed=4)
    assert rep.total_violations == 0
    assert rep.order == 1
    # order-1 ratios of the image are about 2 / sqrt(3) at interior points
    assert min(rep.ratio_lower[:4]) > 0.5


def test_dilation_identity_is_equality():
    rep = dilation_pushforward_check(SQUARE, lambda v: v, 1.0, [0.4, 0.4], 20_000, seed=1)
    assert rep.total_violations == 0
    assert rep.inside == rep.inside_image


def test_dilation_constant_too_large():
    rep = dilation_pushforward_check(SQUARE, lambda v: v, 3.0, [0.5, 0.5], 20_000, seed=1, eps_list=[0.05, 0.1])
    assert rep.total_violations > 0
    with pytest.raises(ValueError):
        dilation_pushforward_check(SQUARE, lambda v: v, 0.0, [0.5, 0.5], 10, seed=1)
