"""Soft thresholding and singular value shrinkage.

``svd_shrink(M, tau)`` is the proximal operator of ``tau * ||.||_*``:
it solves ``min_W tau*||W||_* + 0.5*||W - M||_F^2``.
"""

from __future__ import annotations

import numpy as np

from .matrix_core import _gesdd_or_gesvd, as_matrix


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau < 0:
        raise ValueError(f"shrinkage threshold must be finite and >= 0, got {tau}")
    return tau


def soft_threshold(t, tau: float):
    """``sign(t) * max(0, |t| - tau)``, elementwise for arrays."""
    tau = _check_tau(tau)
    t = np.asarray(t, dtype=np.float64)
    out = np.sign(t) * np.maximum(0.0, np.abs(t) - tau)
    return float(out) if out.ndim == 0 else out


def shrink_with_values(m: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Singular value shrinkage returning ``(W, shrunk singular values)``.

    Solvers use the returned values to evaluate ``||W||_*`` without a
    second decomposition. Only the singular triplets that survive the
    threshold enter the reconstruction.
    """
    tau = _check_tau(tau)
    u, s, vt = _gesdd_or_gesvd(m, compute_uv=True)
    s_shrunk = np.maximum(s - tau, 0.0)
    k = int(np.count_nonzero(s_shrunk))
    w = (u[:, :k] * s_shrunk[:k]) @ vt[:k]
    return w, s_shrunk


def svd_shrink(m, tau: float) -> np.ndarray:
    """Soft-threshold the singular values of `m` by `tau`, keeping its singular vectors."""
    w, _ = shrink_with_values(as_matrix(m), tau)
    return w
