import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singmin_lab.rng import check_seed, philox4x64, uniforms

u64 = st.integers(0, 2**64 - 1)


@given(u64, u64, u64, u64, u64, u64)
@settings(max_examples=50, deadline=None)
def test_philox_matches_numpy(c0, c1, c2, c3, k0, k1):
    words = philox4x64(*(np.array([c], dtype=np.uint64) for c in (c0, c1, c2, c3)), k0, k1)
    # numpy bumps the 256-bit counter before producing its first block
    prev = (c0 + (c1 << 64) + (c2 << 128) + (c3 << 192) - 1) % 2**256
    counter = [(prev >> (64 * i)) & (2**64 - 1) for i in range(4)]
    # explicit uint64 arrays: numpy routes plain int lists through float64
    bg = np.random.Philox(counter=np.array(counter, dtype=np.uint64), key=np.array([k0, k1], dtype=np.uint64))
    ref = bg.random_raw(4)
    np.testing.assert_array_equal(np.array([w[0] for w in words], dtype=np.uint64), ref)


def test_uniforms_open_interval_and_prefix():
    u = uniforms(7, np.arange(2000, dtype=np.uint64), 3, 9)
    assert u.shape == (2000, 9)
    assert np.all((u > 0) & (u < 1))
    np.testing.assert_array_equal(uniforms(7, np.arange(2000, dtype=np.uint64), 3, 5), u[:, :5])


def test_uniforms_streams_differ():
    a = uniforms(1, np.arange(10, dtype=np.uint64), 0, 4)
    assert not np.array_equal(a, uniforms(2, np.arange(10, dtype=np.uint64), 0, 4))
    assert not np.array_equal(a, uniforms(1, np.arange(10, dtype=np.uint64), 1, 4))
    assert not np.array_equal(a, uniforms(1, np.arange(10, dtype=np.uint64), 0, 4, domain=1))


def test_uniform_moments():
    u = uniforms(42, np.arange(100_000, dtype=np.uint64), 0, 1).ravel()
    assert abs(u.mean() - 0.5) < 5 * np.sqrt(1 / 12 / u.size)


@pytest.mark.parametrize("bad", [-1, 2**64, 1.5, "x"])
def test_check_seed_rejects(bad):
    with pytest.raises((ValueError, TypeError)):
        check_seed(bad)
