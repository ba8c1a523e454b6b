"""Regularized least squares by CGLS.

Solves ``min_z ||A z - y||^2 + eta * ||z - c||^2`` through the shift
``z = c + d``, i.e. ``(A^T A + eta I) d = A^T (y - A c)``. CGLS works on the
stacked system ``[A; sqrt(eta) I] d = [y - A c; 0]``, so its least-squares
residual decreases monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class CglsInfo:
    iterations: int
    relative_residual: float  # ||(A^T A + eta I) z - rhs|| / ||rhs||
    converged: bool


def cgls_regularized(
    forward: Callable[[np.ndarray], np.ndarray],
    adjoint: Callable[[np.ndarray], np.ndarray],
    y: np.ndarray,
    center: np.ndarray,
    eta: float,
    tol: float = 1e-6,
    max_iters: int = 100,
) -> tuple[np.ndarray, CglsInfo]:
    """Minimize ``||forward(z) - y||^2 + eta*||z - center||^2``.

    Stops once the normal-equation residual relative to
    ``||A^T y + eta*center||`` is at most `tol`, or after `max_iters`.
    """
    rhs_norm = np.linalg.norm(adjoint(y) + eta * center)
    d = np.zeros_like(center)
    r = y - forward(center)
    s = adjoint(r)  # normal residual at d = 0
    if rhs_norm == 0.0:
        return center.copy(), CglsInfo(0, 0.0, True)
    p = s.copy()
    gamma = float(np.vdot(s, s))
    rel = np.sqrt(gamma) / rhs_norm
    it = 0
    while rel > tol and it < max_iters:
        q = forward(p)
        alpha = gamma / (float(np.vdot(q, q)) + eta * float(np.vdot(p, p)))
        d = d + alpha * p
        r = r - alpha * q
        s = adjoint(r) - eta * d
        gamma_new = float(np.vdot(s, s))
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        rel = np.sqrt(gamma) / rhs_norm
        it += 1
    return center + d, CglsInfo(it, float(rel), bool(rel <= tol))
