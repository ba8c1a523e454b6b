"""Dense matrix helpers: validation, thin SVD, norms and error metrics.

Matrices are plain 2-D ``float64`` numpy arrays. :func:`as_matrix` is the
single entry point that enforces the shape and finiteness checks, so the
rest of the package can take arrays at face value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericalError(RuntimeError):
    """Raised when a dense decomposition fails to converge."""


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return `m` as a finite 2-D float64 array.

    Raises
    ------
    ValueError
        If `m` is not two-dimensional, is empty, or holds NaN/Inf.
    """
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD ``u @ diag(singular_values) @ vt`` with ``k = min(m, n)``."""

    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.singular_values) @ self.vt


def _gesdd_or_gesvd(arr: np.ndarray, compute_uv: bool):
    # gesdd is fast but occasionally fails to converge; gesvd is the fallback.
    try:
        return scipy.linalg.svd(arr, full_matrices=False, compute_uv=compute_uv,
                                check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        pass
    try:
        return scipy.linalg.svd(arr, full_matrices=False, compute_uv=compute_uv,
                                check_finite=False, lapack_driver="gesvd")
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for {arr.shape} input") from exc


def svd(m) -> SvdFactorization:
    """Thin singular value decomposition.

    Singular values come back non-negative and sorted non-increasing.

    Raises
    ------
    NumericalError
        If LAPACK fails to converge with both the divide-and-conquer and
        the QR-iteration drivers.
    """
    arr = as_matrix(m)
    u, s, vt = _gesdd_or_gesvd(arr, compute_uv=True)
    return SvdFactorization(u=u, singular_values=s, vt=vt)


def singular_values(m) -> np.ndarray:
    """Singular values of `m`, non-increasing."""
    return _gesdd_or_gesvd(as_matrix(m), compute_uv=False)


def nuclear_norm(m) -> float:
    r"""Sum of singular values, :math:`\|M\|_* = \sum_i \sigma_i`."""
    return float(np.sum(singular_values(m)))


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(as_matrix(m), "fro"))


def nmse(recovered, truth) -> float:
    """Relative Frobenius error ``||recovered - truth||_F / ||truth||_F``.

    Raises
    ------
    ValueError
        On a shape mismatch, or when `truth` is identically zero (the
        metric is undefined there).
    """
    rec = as_matrix(recovered, "recovered")
    ref = as_matrix(truth, "truth")
    if rec.shape != ref.shape:
        raise ValueError(f"shape mismatch: {rec.shape} vs {ref.shape}")
    denom = np.linalg.norm(ref, "fro")
    if denom == 0.0:
        raise ValueError("nmse undefined for an all-zero truth matrix")
    return float(np.linalg.norm(rec - ref, "fro") / denom)


def read_matrix_csv(path) -> np.ndarray:
    """Dense matrix from a header-less CSV, one row per line."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_matrix(arr, str(path))


def write_matrix_csv(path, m) -> None:
    np.savetxt(path, as_matrix(m), delimiter=",", fmt="%.17g")
