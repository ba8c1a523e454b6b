"""Split Bregman nuclear-norm minimization (MSB).

Solves ``min_Z 0.5*||y - A(Z)||^2 + lambda1*||Z||_*`` through the split
``W = Z`` with Bregman variable ``B``::

    Z <- argmin 0.5*||y - A(Z)||^2 + (eta/2)*||W - Z - B||_F^2
    W <- svd_shrink(Z + B, threshold_factor * lambda1 / eta)
    B <- B - (W - Z)

starting from ``B = ones``, ``W = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..matrix_core import as_matrix
from ..operators import SamplingMask
from ..prox import shrink_with_values
from .common import NormalMap, RecoveryResult, check_problem, positive
from .lsq import cgls_regularized


@dataclass(frozen=True)
class MsbConfig:
    lambda1: float = 0.001
    eta: float = 0.001
    threshold_factor: float = 4.0
    max_outer_iters: int = 500
    obj_tol: float = 1e-7
    inner_ls_tol: float = 1e-6
    inner_ls_max_iters: int = 100

    def __post_init__(self):
        for name in ("lambda1", "eta", "threshold_factor", "obj_tol", "inner_ls_tol"):
            positive(name, getattr(self, name))
        positive("max_outer_iters", self.max_outer_iters, integer=True)
        positive("inner_ls_max_iters", self.inner_ls_max_iters, integer=True)

    @property
    def threshold(self) -> float:
        """Singular value threshold used in the W-update."""
        return self.threshold_factor * self.lambda1 / self.eta


def _z_update(nm: NormalMap, aty, y, w, b, eta, ls_tol, ls_max_iters):
    center = w - b
    if nm.is_mask:
        # A^T A is the 0/1 indicator, so the normal equations are diagonal.
        return (aty + eta * center) / (nm.indicator + eta), None
    return cgls_regularized(nm.forward, nm.adjoint, y, center, eta,
                            tol=ls_tol, max_iters=ls_max_iters)


def msb_z_update(op, y, w, b, eta: float, ls_tol: float = 1e-6,
                 ls_max_iters: int = 100, return_info: bool = False):
    """Solve ``(A^T A + eta I) Z = A^T y + eta (W - B)``.

    Sampling masks get the exact elementwise solution. General operators
    are solved iteratively by CGLS; with ``return_info=True`` the
    :class:`CglsInfo` (``None`` for masks) is returned alongside ``Z``, so
    callers can see a solve that hit `ls_max_iters` before `ls_tol`.
    """
    y = check_problem(op, y)
    w = as_matrix(w, "w")
    b = as_matrix(b, "b")
    if w.shape != op.shape or b.shape != op.shape:
        raise ValueError(f"w and b must have shape {op.shape}")
    positive("eta", eta)
    nm = NormalMap(op)
    z, info = _z_update(nm, nm.adjoint(y), y, w, b, eta, ls_tol, ls_max_iters)
    return (z, info) if return_info else z


def msb_solve(op, y, cfg: MsbConfig | None = None) -> RecoveryResult:
    """Recover a low-rank matrix from ``y = A(Z)`` with Split Bregman.

    Stops when the objective ``0.5*||y - A(Z)||^2 + lambda1*||W||_*``
    changes by less than ``cfg.obj_tol`` between iterations, or after
    ``cfg.max_outer_iters`` iterations. ``converged`` is False if the cap
    was hit or if any inner least-squares solve missed its tolerance.
    """
    cfg = MsbConfig() if cfg is None else cfg
    y = check_problem(op, y)
    nm = NormalMap(op)
    m, n = op.shape
    aty = nm.adjoint(y)
    threshold = cfg.threshold

    w = np.zeros((m, n))
    b = np.ones((m, n))
    z = w
    history: list[float] = []
    ls_failures = 0
    ls_iters = 0
    objective_met = False
    prev = None
    for _ in range(cfg.max_outer_iters):
        z, info = _z_update(nm, aty, y, w, b, cfg.eta, cfg.inner_ls_tol,
                            cfg.inner_ls_max_iters)
        if info is not None:
            ls_iters += info.iterations
            ls_failures += not info.converged
        w, s = shrink_with_values(z + b, threshold)
        b = b - (w - z)
        resid = y - nm.forward(z)
        obj = 0.5 * float(resid @ resid) + cfg.lambda1 * float(s.sum())
        history.append(obj)
        if prev is not None and abs(obj - prev) < cfg.obj_tol:
            objective_met = True
            break
        prev = obj

    gap = float(np.linalg.norm(w - z) / max(np.linalg.norm(z), 1.0))
    notes = {"threshold": threshold}
    if not isinstance(op, SamplingMask):
        notes.update(ls_failures=ls_failures, ls_iterations=ls_iters)
    return RecoveryResult(
        z_final=z,
        w_final=w,
        iterations_used=len(history),
        objective_history=history,
        constraint_gap=gap,
        converged=objective_met and ls_failures == 0,
        solver="msb",
        notes=notes,
    )
