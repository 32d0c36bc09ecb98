import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from singmin_lab.stats import wilson_interval, z_value


def test_z_value():
    assert z_value(0.95) == pytest.approx(1.959963984540054)
    assert z_value(0.99) == pytest.approx(2.5758293035489)


def test_wilson_hand_computed():
    # z = 1.96, 10 of 100: centre (0.1 + z^2/200) / (1 + z^2/100)
    z = z_value(0.95)
    centre = (0.1 + z * z / 200) / (1 + z * z / 100)
    half = z / (1 + z * z / 100) * np.sqrt(0.1 * 0.9 / 100 + z * z / 40000)
    p, lo, hi = wilson_interval(10, 100)
    assert p == 0.1
    assert lo == pytest.approx(centre - half)
    assert hi == pytest.approx(centre + half)


def test_wilson_against_statsmodels():
    proportion = pytest.importorskip("statsmodels.stats.proportion")
    for count, total in [(0, 50), (3, 1000), (500, 1000), (1000, 1000)]:
        lo, hi = proportion.proportion_confint(count, total, alpha=0.05, method="wilson")
        _, mlo, mhi = wilson_interval(count, total)
        assert mlo == pytest.approx(lo, abs=1e-12)
        assert mhi == pytest.approx(hi, abs=1e-12)


def test_zero_count_has_positive_upper():
    p, lo, hi = wilson_interval(0, 1000)
    assert p == 0 and lo == 0 and 0 < hi < 0.01


@given(st.integers(1, 10**7).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))), st.floats(0.5, 0.999))
def test_wilson_contains_estimate(ct, level):
    count, total = ct
    p, lo, hi = wilson_interval(count, total, level)
    assert 0 <= lo <= p <= hi <= 1
