"""Independent reference computations used to cross-check :mod:`linalg`.

Nothing here shares code with the Jacobi routine: singular values are found
as roots of the characteristic polynomial of ``A^T A``, located by bisection
on Sturm counts after a Householder reduction to bidiagonal form.
"""

from __future__ import annotations

import numpy as np

__all__ = ["bidiagonalize", "sturm_count", "bisection_singular_values"]

_PIVMIN = 1e-300


def _householder(x):
    v = np.array(x, dtype=float)
    alpha = -np.copysign(np.linalg.norm(v), v[0] if v[0] != 0 else 1.0)
    v[0] -= alpha
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return None, float(x[0])
    return v / nv, alpha


def bidiagonalize(a) -> tuple[np.ndarray, np.ndarray]:
    """Golub-Kahan reduction of a square matrix; returns (diagonal, superdiagonal)."""
    b = np.array(a, dtype=float)
    n = b.shape[0]
    for k in range(n):
        v, _ = _householder(b[k:, k])
        if v is not None:
            b[k:, k:] -= 2.0 * np.outer(v, v @ b[k:, k:])
        if k < n - 2:
            v, _ = _householder(b[k, k + 1 :])
            if v is not None:
                b[k:, k + 1 :] -= 2.0 * np.outer(b[k:, k + 1 :] @ v, v)
    return np.diagonal(b).copy(), np.diagonal(b, 1).copy()


def sturm_count(off: np.ndarray, x: float) -> int:
    """Eigenvalues below ``x`` of the zero-diagonal tridiagonal matrix with
    off-diagonal ``off``: sign changes of its leading principal minors
    ``det(T_k - x I)``, tracked through their ratios."""
    count = 0
    q = -x
    if q < 0:
        count += 1
    for b in off:
        if q == 0.0:
            q = -_PIVMIN
        q = -x - b * b / q
        if q < 0:
            count += 1
    return count


def bisection_singular_values(a, max_iter: int = 200) -> np.ndarray:
    """Singular values (descending) via bisection on the characteristic
    polynomial of ``A^T A`` in its Golub-Kahan tridiagonal form."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    d, e = bidiagonalize(a)
    off = np.empty(2 * n - 1)
    off[0::2] = d
    off[1::2] = e
    upper = float(np.sqrt(np.sum(d * d) + np.sum(e * e))) * (1 + 1e-12) + _PIVMIN
    out = np.empty(n)
    for k in range(n):
        lo, hi = 0.0, upper
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            # n eigenvalues of T are <= 0; the rest are singular values
            if sturm_count(off, mid) - n > k:
                hi = mid
            else:
                lo = mid
        out[k] = 0.5 * (lo + hi)
    return out[::-1]
