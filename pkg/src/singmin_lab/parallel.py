"""Fixed-size chunking of index ranges over a process pool.

Chunk boundaries depend only on the total sample count, never on the
number of workers, and results are reassembled in chunk order. Together
with counter-based sampling this makes every output independent of the
worker count.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

CHUNK = 1 << 15
CHUNK_ENTRIES = 1 << 19


def chunk_for_dim(n: int) -> int:
    """Matrices per chunk for n x n draws; bounded so a chunk stays a few MB."""
    return max(16, min(CHUNK, CHUNK_ENTRIES // (n * n)))


def chunk_ranges(total: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    return [(s, min(s + chunk, total)) for s in range(0, total, chunk)]


def _call(fn, args, bounds):
    return fn(*args, bounds[0], bounds[1])


def map_chunks(fn, total: int, args: tuple = (), workers: int = 1, chunk: int = CHUNK) -> list:
    """Evaluate ``fn(*args, start, stop)`` for every chunk, in order."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    ranges = chunk_ranges(total, chunk)
    if workers == 1 or len(ranges) == 1:
        return [fn(*args, s, e) for s, e in ranges]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(partial(_call, fn, args), ranges))


def gather(fn, total: int, args: tuple = (), workers: int = 1, chunk: int = CHUNK) -> dict[str, np.ndarray]:
    """:func:`map_chunks` for functions returning dicts of arrays; concatenates per key."""
    parts = map_chunks(fn, total, args, workers, chunk)
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
