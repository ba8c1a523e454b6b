"""Result container and helpers shared by the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..operators import GeneralOperator, SamplingMask


class SolverDivergence(RuntimeError):
    """The data residual blew up past the divergence guard."""


@dataclass
class RecoveryResult:
    """Recovered matrix plus convergence diagnostics.

    Attributes
    ----------
    z_final : ndarray
        The data-consistency iterate; the headline answer.
    w_final : ndarray
        The low-rank proxy. Only MSB keeps a separate proxy; the other
        solvers return ``z_final`` here.
    iterations_used : int
        Iterations run (inner iterations summed over stages for FPC).
    objective_history : list of float
        One objective value per iteration.
    constraint_gap : float
        ``||W - Z||_F / max(||Z||_F, 1)`` for MSB, 0 otherwise.
    converged : bool
        True when the stopping test fired before the iteration cap.
    """

    z_final: np.ndarray
    w_final: np.ndarray
    iterations_used: int
    objective_history: list[float] = field(default_factory=list)
    constraint_gap: float = 0.0
    converged: bool = False
    solver: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")


def check_problem(op, y) -> np.ndarray:
    if not isinstance(op, (SamplingMask, GeneralOperator)):
        raise TypeError(f"unsupported operator type {type(op).__name__}")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1 or y.size != op.n_measurements:
        raise ValueError(
            f"measurement vector has shape {y.shape}, operator expects ({op.n_measurements},)")
    if not np.all(np.isfinite(y)):
        raise ValueError("measurement vector has non-finite entries")
    return y


class NormalMap:
    """``A^T A`` and ``A(.)`` helpers with a fast path for sampling masks."""

    def __init__(self, op):
        self.op = op
        self.is_mask = isinstance(op, SamplingMask)
        if self.is_mask:
            self._r, self._c = op.row_idx, op.col_idx
            self.indicator = op.indicator()

    def forward(self, z: np.ndarray) -> np.ndarray:
        if self.is_mask:
            return z[self._r, self._c]
        return self.op.matrix_form @ z.ravel(order="F")

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        if self.is_mask:
            out = np.zeros(self.op.shape)
            out[self._r, self._c] = y
            return out
        return (self.op.matrix_form.T @ y).reshape(self.op.shape, order="F")

    def gram(self, z: np.ndarray) -> np.ndarray:
        if self.is_mask:
            return self.indicator * z
        return self.adjoint(self.forward(z))


def positive(name: str, value, integer: bool = False) -> None:
    ok = np.isfinite(value) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok:
        kind = "positive integer" if integer else "positive finite real"
        raise ValueError(f"{name} must be a {kind}, got {value!r}")
