"""Row distributions for square random matrices with i.i.d. rows.

Each sampler is addressed by ``(seed, matrix_index, row_index)``; see
:mod:`singmin_lab.rng` for why that makes results independent of how the
work is split.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .rng import DOMAIN_ENSEMBLE, check_seed, uniforms

__all__ = [
    "Kind",
    "EnsembleSpec",
    "sample_rows",
    "sample_row",
    "sample_matrix",
    "sample_matrices",
    "gaussian_from_uniforms",
]

SQRT3 = np.sqrt(3.0)
LAPLACE_SCALE = 1.0 / np.sqrt(2.0)  # unit variance


class Kind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    CUBE = "cube"  # uniform on [-sqrt 3, sqrt 3]^n: isotropic log-concave
    LAPLACE = "laplace"
    RADEMACHER = "rademacher"
    CAUCHY = "cauchy"
    SPHERE = "sphere"
    LOWDIM = "lowdim"
    SHIFTED = "shifted"


LOG_CONCAVE = frozenset({Kind.CUBE, Kind.LAPLACE})
ALMOST_SURELY_INVERTIBLE = frozenset({Kind.GAUSSIAN, Kind.CUBE, Kind.LAPLACE, Kind.CAUCHY, Kind.SPHERE})


@dataclass(frozen=True)
class EnsembleSpec:
    """Law of the rows plus the matrix dimension.

    ``m`` is the subspace dimension of ``lowdim`` rows; ``shift`` the
    diagonal offset of the ``shifted`` counterexample.
    """

    kind: Kind
    n: int
    m: int | None = None
    shift: float = 3.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if self.kind is Kind.LOWDIM:
            if self.m is None or not 1 <= self.m < self.n:
                raise ValueError(f"lowdim rows need 1 <= m < n, got m={self.m}, n={self.n}")
        elif self.m is not None:
            raise ValueError(f"m only applies to lowdim rows, not {self.kind.value}")
        if self.kind is Kind.SHIFTED and not self.shift > 1:
            raise ValueError(f"shift must exceed 1, got {self.shift}")

    @property
    def log_concave(self) -> bool:
        return self.kind in LOG_CONCAVE

    def describe(self) -> str:
        extra = ""
        if self.kind is Kind.LOWDIM:
            extra = f",m={self.m}"
        elif self.kind is Kind.SHIFTED:
            extra = f",shift={self.shift!r}"
        return f"{self.kind.value}(n={self.n}{extra})"


def gaussian_from_uniforms(u: np.ndarray, count: int) -> np.ndarray:
    """Box-Muller on consecutive uniform pairs along the last axis."""
    u1 = u[..., 0::2]
    u2 = u[..., 1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    z = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    return z.reshape(u.shape[:-1] + (-1,))[..., :count]


def _uniform_count(spec: EnsembleSpec) -> int:
    if spec.kind in (Kind.GAUSSIAN, Kind.SPHERE):
        return 2 * (-(-spec.n // 2))
    if spec.kind is Kind.LOWDIM:
        return 2 * (-(-spec.m // 2))
    return spec.n


def sample_rows(spec: EnsembleSpec, seed, matrix_index, row_index) -> np.ndarray:
    """Rows for broadcast arrays of indices; shape ``S + (n,)``."""
    seed = check_seed(seed)
    matrix_index = np.asarray(matrix_index)
    row_index = np.asarray(row_index)
    if np.any(matrix_index < 0) or np.any(row_index < 0) or np.any(row_index >= spec.n):
        raise ValueError(f"row_index must lie in [0, {spec.n}) and matrix_index must be >= 0")
    u = uniforms(seed, matrix_index, row_index, _uniform_count(spec), DOMAIN_ENSEMBLE)
    n = spec.n
    kind = spec.kind
    if kind is Kind.GAUSSIAN:
        return gaussian_from_uniforms(u, n)
    if kind is Kind.CUBE:
        return SQRT3 * (2.0 * u - 1.0)
    if kind is Kind.LAPLACE:
        c = u - 0.5
        return -LAPLACE_SCALE * np.sign(c) * np.log1p(-2.0 * np.abs(c))
    if kind is Kind.RADEMACHER:
        return np.where(u < 0.5, -1.0, 1.0)
    if kind is Kind.CAUCHY:
        return np.tan(np.pi * (u - 0.5))
    if kind is Kind.SPHERE:
        z = gaussian_from_uniforms(u, n)
        return z / np.linalg.norm(z, axis=-1, keepdims=True)
    if kind is Kind.LOWDIM:
        z = gaussian_from_uniforms(u, spec.m)
        pad = [(0, 0)] * (z.ndim - 1) + [(0, n - spec.m)]
        return np.pad(z, pad)
    if kind is Kind.SHIFTED:
        rows = 2.0 * u - 1.0
        rows += spec.shift * (np.arange(n) == row_index[..., None])
        return rows
    raise AssertionError(kind)


def sample_row(spec: EnsembleSpec, seed, matrix_index: int, row_index: int) -> np.ndarray:
    return sample_rows(spec, seed, matrix_index, row_index)


def sample_matrices(spec: EnsembleSpec, seed, start: int, stop: int) -> np.ndarray:
    """Matrices ``start, ..., stop - 1`` as a ``(stop - start, n, n)`` stack."""
    idx = np.arange(start, stop, dtype=np.uint64)[:, None]
    rows = np.arange(spec.n)[None, :]
    return sample_rows(spec, seed, idx, rows)


def sample_matrix(spec: EnsembleSpec, seed, matrix_index: int) -> np.ndarray:
    return sample_matrices(spec, seed, matrix_index, matrix_index + 1)[0]
