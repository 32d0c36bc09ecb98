"""Counter-based random streams.

Every draw is a pure function of ``(seed, index, row, block, domain)``: a
Philox4x64-10 block cipher is applied to the counter, so any sample can be
regenerated in isolation and the work can be split across processes in any
way without changing a single bit of the output.

The bijection is the same one implemented by :class:`numpy.random.Philox`;
it is re-implemented here on ``uint64`` arrays so that millions of
independent counters can be hashed in one vectorised call.
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox4x64", "uniforms", "check_seed", "DOMAIN_ENSEMBLE", "DOMAIN_LAW"]

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_MUL0 = np.uint64(0xD2E7470EE14C6C93)
_MUL1 = np.uint64(0xCA5A826395121157)
_WEYL0 = np.uint64(0x9E3779B97F4A7C15)
_WEYL1 = np.uint64(0xBB67AE8584CAA73B)
_ROUNDS = 10

# domain word of the counter; keeps unrelated stream families apart
DOMAIN_ENSEMBLE = 0
DOMAIN_LAW = 1

_TWO_M53 = 2.0**-53


def check_seed(seed) -> int:
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _mulhilo(a, b):
    # full 64x64 -> 128 bit product split into (hi, lo) words
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    hi = a1 * b1 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)
    return hi, a * b


def philox4x64(c0, c1, c2, c3, k0, k1):
    """Apply Philox4x64-10 to broadcastable ``uint64`` counter words.

    Returns the four output words. Matches ``numpy.random.Philox`` exactly
    (numpy increments its counter before the first block is produced).
    """
    c0, c1, c2, c3 = np.broadcast_arrays(*(np.asarray(c, dtype=np.uint64) for c in (c0, c1, c2, c3)))
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    with np.errstate(over="ignore"):
        for r in range(_ROUNDS):
            if r:
                k0 = k0 + _WEYL0
                k1 = k1 + _WEYL1
            hi0, lo0 = _mulhilo(_MUL0, c0)
            hi1, lo1 = _mulhilo(_MUL1, c2)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def uniforms(seed, index, row, count: int, domain: int = DOMAIN_ENSEMBLE) -> np.ndarray:
    """Open-interval uniforms on (0, 1) for each ``(index, row)`` pair.

    ``index`` and ``row`` are broadcast together to shape ``S``; the result
    has shape ``S + (count,)``. Uniform ``j`` of a given pair is taken from
    output word ``j % 4`` of Philox block ``j // 4``, so a shorter request is
    always a prefix of a longer one.
    """
    seed = check_seed(seed)
    index = np.asarray(index, dtype=np.uint64)
    row = np.asarray(row, dtype=np.uint64)
    index, row = np.broadcast_arrays(index, row)
    nblocks = -(-count // 4)
    block = np.arange(nblocks, dtype=np.uint64)
    words = philox4x64(
        block,
        row[..., None],
        index[..., None],
        np.uint64(domain),
        seed,
        0,
    )
    raw = np.stack(words, axis=-1).reshape(index.shape + (4 * nblocks,))[..., :count]
    # 53 high bits, centred in their cell so 0 and 1 are never produced
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53
