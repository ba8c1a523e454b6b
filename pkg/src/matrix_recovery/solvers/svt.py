"""Singular value thresholding (linearized Bregman) baseline.

Iterates ``Z = D_tau(A^T(v))``, ``v <- v + delta*(y - A(Z))`` from ``v = 0``.
The dual ``v`` lives in measurement space; for masks this is the
observed-support part of the usual ``m x n`` dual and nothing is lost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..prox import shrink_with_values
from .common import NormalMap, RecoveryResult, SolverDivergence, check_problem, positive

DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SvtConfig:
    """SVT settings.

    ``tau`` and ``step_delta`` default to ``5*sqrt(m*n)`` and
    ``1.2*m*n/N``; leave them as None to have them resolved against the
    operator at solve time.
    """

    tau: Optional[float] = None
    step_delta: Optional[float] = None
    max_iters: int = 500
    residual_tol: float = 1e-4

    def __post_init__(self):
        if self.tau is not None:
            positive("tau", self.tau)
        if self.step_delta is not None:
            positive("step_delta", self.step_delta)
        positive("max_iters", self.max_iters, integer=True)
        positive("residual_tol", self.residual_tol)

    def resolve(self, op) -> "SvtConfig":
        m, n = op.shape
        tau = self.tau if self.tau is not None else 5.0 * np.sqrt(m * n)
        delta = (self.step_delta if self.step_delta is not None
                 else 1.2 * m * n / op.n_measurements)
        return SvtConfig(tau=float(tau), step_delta=float(delta),
                         max_iters=self.max_iters, residual_tol=self.residual_tol)


def svt_solve(op, y, cfg: SvtConfig | None = None) -> RecoveryResult:
    """Run SVT until ``||A(Z) - y|| / ||y|| <= residual_tol`` or `max_iters`.

    Raises
    ------
    SolverDivergence
        If the residual exceeds ``1e6`` times its initial value ``||y||``.
    """
    cfg = (SvtConfig() if cfg is None else cfg).resolve(op)
    y = check_problem(op, y)
    nm = NormalMap(op)
    y_norm = float(np.linalg.norm(y))
    dual = np.zeros_like(y)
    history: list[float] = []
    converged = False
    z = np.zeros(op.shape)
    for k in range(1, cfg.max_iters + 1):
        z, s = shrink_with_values(nm.adjoint(dual), cfg.tau)
        resid = y - nm.forward(z)
        r_norm = float(np.linalg.norm(resid))
        history.append(float(s.sum()))
        rel = r_norm / y_norm if y_norm > 0 else r_norm
        if rel <= cfg.residual_tol:
            converged = True
            break
        if r_norm > DIVERGENCE_FACTOR * y_norm:
            raise SolverDivergence(
                f"SVT residual {r_norm:.3e} exceeds {DIVERGENCE_FACTOR:g} x initial "
                f"{y_norm:.3e} at iteration {k}")
        dual = dual + cfg.step_delta * resid
    return RecoveryResult(
        z_final=z,
        w_final=z,
        iterations_used=len(history),
        objective_history=history,
        constraint_gap=0.0,
        converged=converged,
        solver="svt",
        notes={"tau": cfg.tau, "step_delta": cfg.step_delta, "relative_residual": rel},
    )
