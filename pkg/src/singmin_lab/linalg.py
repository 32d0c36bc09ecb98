"""Small dense linear algebra for square random matrices.

All routines accept a single matrix of shape ``(n, n)`` or a stack of shape
``(B, n, n)`` and work on the whole stack at once; a stack is how the Monte
Carlo engines feed tens of thousands of matrices through in one call.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionError",
    "SingularMatrixError",
    "DegenerateRowsError",
    "as_matrix",
    "det",
    "svd_values",
    "sigma_min",
    "op_norm",
    "inverse",
    "invertible",
    "condition_number",
    "cross_product",
    "y_vector",
]

JACOBI_TOL = 1e-13
MAX_SWEEPS = 60
MAX_JACOBI_DIM = 64
EPS_MACH = 2.0**-52
DEGENERATE_TOL = 1e-12


class DimensionError(ValueError):
    """Input array has the wrong shape."""


class SingularMatrixError(ArithmeticError):
    """Matrix fails the numerical invertibility gate."""


class DegenerateRowsError(ArithmeticError):
    """Rows are (numerically) linearly dependent."""


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Validate ``a`` as a finite float64 matrix or stack of matrices."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim not in (2, 3) or a.shape[-1] < 1 or a.shape[-2] < 1:
        raise DimensionError(f"expected a matrix or a stack of matrices, got shape {a.shape}")
    if square and a.shape[-1] != a.shape[-2]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape[-2:]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _stacked(a):
    return (a[None], True) if a.ndim == 2 else (a, False)


def _unstack(x, single):
    return x[0] if single else x


def det(a):
    """Determinant by LU factorisation with partial pivoting.

    The sign is accumulated from the row swaps, so it is exact whenever the
    pivots are.
    """
    a, single = _stacked(as_matrix(a))
    lu = a.copy()
    nb, n, _ = lu.shape
    rows = np.arange(nb)
    sign = np.ones(nb)
    for k in range(n):
        piv = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        swap = piv != k
        if swap.any():
            top = lu[rows, k].copy()
            lu[rows, k] = lu[rows, piv]
            lu[rows, piv] = top
            sign[swap] = -sign[swap]
        pivot = lu[:, k, k]
        if k + 1 < n:
            nz = pivot != 0.0
            factors = np.divide(lu[:, k + 1 :, k], pivot[:, None], out=np.zeros((nb, n - k - 1)), where=nz[:, None])
            lu[:, k + 1 :, k:] -= factors[:, :, None] * lu[:, None, k, k:]
    out = sign * np.prod(np.diagonal(lu, axis1=1, axis2=2), axis=1)
    return float(out[0]) if single else out


def _jacobi_columns(a: np.ndarray, tol: float = JACOBI_TOL) -> np.ndarray:
    """One-sided Jacobi: rotate column pairs until mutually orthogonal.

    Returns the column norms of the orthogonalised stack, unsorted.
    """
    u = a.copy()
    nb, _, n = u.shape
    active = np.ones(nb, dtype=bool)
    for _ in range(MAX_SWEEPS):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        w = u[idx]
        rotated = np.zeros(idx.size, dtype=bool)
        for p in range(n - 1):
            for q in range(p + 1, n):
                x = w[:, :, p]
                y = w[:, :, q]
                alpha = np.einsum("bi,bi->b", x, x)
                beta = np.einsum("bi,bi->b", y, y)
                gamma = np.einsum("bi,bi->b", x, y)
                big = np.abs(gamma) > tol * np.sqrt(alpha * beta)
                if not big.any():
                    continue
                rotated |= big
                g = np.where(big, gamma, 1.0)
                with np.errstate(over="ignore"):
                    # huge zeta means a negligible rotation: t -> 0
                    zeta = (beta - alpha) / (2.0 * g)
                    t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                c = np.where(big, c, 1.0)[:, None]
                s = np.where(big, s, 0.0)[:, None]
                xn = c * x - s * y
                w[:, :, q] = s * x + c * y
                w[:, :, p] = xn
        u[idx] = w
        active[idx] = rotated
    return np.sqrt(np.einsum("bij,bij->bj", u, u))


def svd_values(a):
    """Singular values in descending order (one-sided Jacobi).

    Intended for desk-scale matrices, ``n <= 64``.
    """
    a, single = _stacked(as_matrix(a))
    if a.shape[-1] > MAX_JACOBI_DIM:
        raise DimensionError(f"svd_values supports n <= {MAX_JACOBI_DIM}, got n = {a.shape[-1]}")
    sv = -np.sort(-_jacobi_columns(a), axis=1)
    return _unstack(sv, single)


def sigma_min(a):
    sv = svd_values(a)
    return float(sv[-1]) if np.ndim(sv) == 1 else sv[:, -1]


def _norm_kind(p):
    if p in (1, 2):
        return int(p)
    if p == np.inf or (isinstance(p, str) and p.lower() in ("inf", "infinity")):
        return np.inf
    raise ValueError(f"unsupported norm p={p!r}; expected 1, 2 or inf")


def op_norm(a, p=2):
    """Operator norm induced by the vector p-norm, p in {1, 2, inf}."""
    p = _norm_kind(p)
    a, single = _stacked(as_matrix(a))
    if p == 1:
        out = np.abs(a).sum(axis=1).max(axis=1)
    elif p == np.inf:
        out = np.abs(a).sum(axis=2).max(axis=1)
    else:
        out = svd_values(a)[:, 0]
    return float(out[0]) if single else out


def invertible(sv) -> np.ndarray | bool:
    """Numerical invertibility gate on (stacks of) descending singular values."""
    sv = np.asarray(sv)
    n = sv.shape[-1]
    return sv[..., -1] > n * EPS_MACH * sv[..., 0]


def _gauss_jordan(a: np.ndarray) -> np.ndarray:
    nb, n, _ = a.shape
    aug = np.concatenate([a, np.broadcast_to(np.eye(n), a.shape)], axis=2)
    rows = np.arange(nb)
    for k in range(n):
        piv = k + np.argmax(np.abs(aug[:, k:, k]), axis=1)
        top = aug[rows, k].copy()
        aug[rows, k] = aug[rows, piv]
        aug[rows, piv] = top
        pivot = aug[:, k, k].copy()
        pivot[pivot == 0.0] = np.inf  # only reached for gated-out matrices
        aug[:, k, :] /= pivot[:, None]
        factors = aug[:, :, k].copy()
        factors[:, k] = 0.0
        aug -= factors[:, :, None] * aug[:, None, k, :]
    return aug[:, :, n:]


def inverse(a):
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    Raises :class:`SingularMatrixError` when ``sigma_min <= n 2^-52 sigma_max``.
    """
    a, single = _stacked(as_matrix(a))
    if not np.all(invertible(svd_values(a))):
        raise SingularMatrixError("matrix is numerically singular")
    return _unstack(_gauss_jordan(a), single)


def condition_number(a, p=2):
    """``||A||_p ||A^-1||_p``, or ``inf`` when A fails the invertibility gate."""
    p = _norm_kind(p)
    a, single = _stacked(as_matrix(a))
    sv = svd_values(a)
    ok = invertible(sv)
    out = np.full(a.shape[0], np.inf)
    if p == 2:
        out[ok] = sv[ok, 0] / sv[ok, -1]
    elif ok.any():
        good = a[ok]
        out[ok] = op_norm(good, p) * op_norm(_gauss_jordan(good), p)
    return float(out[0]) if single else out


def cross_product(rows):
    """Generalised cross product of ``n - 1`` vectors in R^n.

    Component ``i`` (0-based) is ``(-1)**i`` times the determinant of the
    rows with column ``i`` deleted, i.e. the cofactor expansion of the formal
    determinant whose first row holds the basis vectors.
    """
    rows = as_matrix(rows, square=False)
    rows, single = _stacked(rows)
    nb, m, n = rows.shape
    if n < 2 or m != n - 1:
        raise DimensionError(f"expected an (n-1) x n stack with n >= 2, got {m} x {n}")
    minors = np.stack([np.delete(rows, i, axis=2) for i in range(n)], axis=1)
    cof = det(minors.reshape(nb * n, m, m)).reshape(nb, n)
    cof *= np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return _unstack(cof, single)


def y_vectors(rows):
    """Batched :func:`y_vector`; returns ``(Y, ok)`` instead of raising.

    Rows of ``Y`` where ``ok`` is False are NaN.
    """
    rows = as_matrix(rows, square=False)
    rows, _ = _stacked(rows)
    w = cross_product(rows)
    top = np.abs(w).max(axis=1)
    scale = np.prod(np.linalg.norm(rows, axis=2), axis=1)
    ok = top > DEGENERATE_TOL * scale
    y = np.full_like(w, np.nan)
    y[ok] = w[ok] / top[ok, None]
    return y, ok


def y_vector(rows) -> np.ndarray:
    """Cross product of the rows rescaled to unit sup-norm.

    The result is orthogonal to every row and has Euclidean norm at least 1.
    """
    rows = as_matrix(rows, square=False)
    if rows.ndim != 2:
        raise DimensionError("y_vector takes a single (n-1) x n matrix")
    y, ok = y_vectors(rows)
    if not ok[0]:
        raise DegenerateRowsError("rows are linearly dependent; cross product vanishes")
    return y[0]
