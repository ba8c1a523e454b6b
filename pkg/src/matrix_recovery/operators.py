"""Linear measurement operators ``A: R^{m x n} -> R^N`` and their adjoints.

Matrices are vectorized column by column (Fortran order), so the linear
position of entry ``(i, j)`` is ``j * rows + i``. Entry-sampling masks keep
their observed positions sorted by that index, which fixes the order of
the measurement vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .matrix_core import as_matrix


def _check_dims(rows: int, cols: int) -> None:
    if int(rows) < 1 or int(cols) < 1:
        raise ValueError(f"dimensions must be positive, got {rows}x{cols}")


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """Entry-sampling operator: ``A(Z)`` lists the observed entries of Z.

    Build instances with :meth:`from_pairs`, :meth:`from_linear` or
    :func:`random_mask` rather than calling the constructor directly.
    """

    rows: int
    cols: int
    linear: np.ndarray  # sorted column-major positions
    row_idx: np.ndarray = field(init=False, repr=False)
    col_idx: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _check_dims(self.rows, self.cols)
        lin = np.asarray(self.linear, dtype=np.int64)
        if lin.ndim != 1 or lin.size < 1:
            raise ValueError("a sampling mask needs at least one observed entry")
        if lin.min() < 0 or lin.max() >= self.rows * self.cols:
            raise ValueError("observed index out of bounds")
        if np.any(np.diff(lin) <= 0):
            raise ValueError("observed indices must be strictly increasing (no duplicates)")
        lin = lin.copy()
        lin.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        row_idx = lin % self.rows
        col_idx = lin // self.rows
        row_idx.setflags(write=False)
        col_idx.setflags(write=False)
        object.__setattr__(self, "row_idx", row_idx)
        object.__setattr__(self, "col_idx", col_idx)

    @classmethod
    def from_linear(cls, rows: int, cols: int, linear: Iterable[int]) -> "SamplingMask":
        lin = np.asarray(list(linear) if not isinstance(linear, np.ndarray) else linear,
                         dtype=np.int64)
        if np.unique(lin).size != lin.size:
            raise ValueError("duplicate observed entries")
        return cls(int(rows), int(cols), np.sort(lin))

    @classmethod
    def from_pairs(cls, rows: int, cols: int, pairs: Iterable[tuple[int, int]]) -> "SamplingMask":
        """Mask observing the 0-based ``(row, col)`` pairs given, in any order."""
        _check_dims(rows, cols)
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        r, c = arr[:, 0], arr[:, 1]
        if np.any((r < 0) | (r >= rows) | (c < 0) | (c >= cols)):
            raise ValueError("observed index out of bounds")
        return cls.from_linear(rows, cols, c * rows + r)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def n_measurements(self) -> int:
        return int(self.linear.size)

    @property
    def sampling_ratio(self) -> float:
        return self.n_measurements / (self.rows * self.cols)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist()))

    def indicator(self) -> np.ndarray:
        """0/1 matrix marking the observed entries; this is ``A^T A`` as a diagonal."""
        out = np.zeros((self.rows, self.cols))
        out[self.row_idx, self.col_idx] = 1.0
        return out

    def forward(self, z: np.ndarray) -> np.ndarray:
        z = as_matrix(z, "z")
        if z.shape != self.shape:
            raise ValueError(f"operator expects {self.shape}, got {z.shape}")
        return z[self.row_idx, self.col_idx]

    def adjoint(self, y) -> np.ndarray:
        y = _as_vector(y, self.n_measurements)
        out = np.zeros((self.rows, self.cols))
        out[self.row_idx, self.col_idx] = y
        return out


@dataclass(frozen=True, eq=False)
class GeneralOperator:
    """Dense map ``y = matrix_form @ vec(Z)`` with ``vec`` column-major.

    Block-diagonal operators acting column by column are one instance;
    any finite ``N x (rows*cols)`` matrix with ``N < rows*cols`` is accepted.
    """

    rows: int
    cols: int
    matrix_form: np.ndarray

    def __post_init__(self):
        _check_dims(self.rows, self.cols)
        a = as_matrix(self.matrix_form, "matrix_form")
        if a.shape[1] != self.rows * self.cols:
            raise ValueError(
                f"matrix_form has {a.shape[1]} columns, expected {self.rows * self.cols}")
        if a.shape[0] >= self.rows * self.cols:
            raise ValueError("general operator must be underdetermined (N < rows*cols)")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "matrix_form", a)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def n_measurements(self) -> int:
        return int(self.matrix_form.shape[0])

    def forward(self, z: np.ndarray) -> np.ndarray:
        z = as_matrix(z, "z")
        if z.shape != self.shape:
            raise ValueError(f"operator expects {self.shape}, got {z.shape}")
        return self.matrix_form @ z.ravel(order="F")

    def adjoint(self, y) -> np.ndarray:
        y = _as_vector(y, self.n_measurements)
        return (self.matrix_form.T @ y).reshape(self.shape, order="F")


MeasurementOperator = Union[SamplingMask, GeneralOperator]


def _as_vector(y, n: int) -> np.ndarray:
    v = np.asarray(y, dtype=np.float64)
    if v.ndim != 1 or v.size != n:
        raise ValueError(f"measurement vector must have length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("measurement vector has non-finite entries")
    return v


def apply(op: MeasurementOperator, z) -> np.ndarray:
    """Forward action ``A(Z)``, a length-N vector."""
    return op.forward(z)


def adjoint(op: MeasurementOperator, y) -> np.ndarray:
    """Adjoint action ``A^T(y)``, an ``rows x cols`` matrix."""
    return op.adjoint(y)


def random_mask(rows: int, cols: int, sampling_ratio: float, rng_seed) -> SamplingMask:
    """Uniformly sample ``round(sampling_ratio * rows * cols)`` distinct entries.

    Rows or columns left entirely unobserved are possible and allowed.
    """
    _check_dims(rows, cols)
    if not (0.0 < sampling_ratio <= 1.0):
        raise ValueError(f"sampling_ratio must lie in (0, 1], got {sampling_ratio}")
    total = rows * cols
    n_obs = int(round(sampling_ratio * total))
    if n_obs < 1:
        raise ValueError("sampling ratio too small: no entries would be observed")
    rng = np.random.default_rng(rng_seed)
    linear = rng.choice(total, size=n_obs, replace=False)
    return SamplingMask(rows, cols, np.sort(linear))


# -- text formats -------------------------------------------------------------

def read_observations(path, rows: int, cols: int) -> tuple[SamplingMask, np.ndarray]:
    """Parse ``row,col,value`` lines into a mask and its measurement vector.

    The returned vector follows the mask's canonical (column-major) order.
    """
    pairs, values = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'row,col,value', got {line!r}")
            try:
                r, c, v = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not np.isfinite(v):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            pairs.append((r, c))
            values.append(v)
    if not pairs:
        raise ValueError(f"{path}: no observations")
    arr = np.asarray(pairs, dtype=np.int64)
    r, c = arr[:, 0], arr[:, 1]
    if np.any((r < 0) | (r >= rows) | (c < 0) | (c >= cols)):
        raise ValueError(f"{path}: observation index outside {rows}x{cols}")
    linear = c * rows + r
    order = np.argsort(linear, kind="stable")
    if np.any(np.diff(linear[order]) == 0):
        raise ValueError(f"{path}: duplicate observation")
    mask = SamplingMask(rows, cols, linear[order])
    return mask, np.asarray(values)[order]


def write_observations(path, mask: SamplingMask, y) -> None:
    y = _as_vector(y, mask.n_measurements)
    with open(path, "w") as fh:
        for (r, c), v in zip(mask.pairs(), y):
            fh.write(f"{r},{c},{float(v)!r}\n")


def write_mask(path, mask: SamplingMask) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{r},{c}\n" for r, c in mask.pairs())


def read_mask(path, rows: int, cols: int) -> SamplingMask:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            r, c = (int(t) for t in line.split(","))
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected 'row,col', got {line!r}") from None
        pairs.append((r, c))
    return SamplingMask.from_pairs(rows, cols, pairs)
