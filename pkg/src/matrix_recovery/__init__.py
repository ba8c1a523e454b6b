"""Low-rank matrix recovery by nuclear-norm minimization.

Solvers: Split Bregman (``msb_solve``), singular value thresholding
(``svt_solve``) and fixed point continuation (``fpc_solve``), plus the
synthetic and MovieLens benchmark drivers used to compare them.
"""

from .matrix_core import (
    NumericalError,
    SvdFactorization,
    as_matrix,
    frobenius_norm,
    nmse,
    nuclear_norm,
    svd,
)
from .operators import (
    GeneralOperator,
    SamplingMask,
    adjoint,
    apply,
    random_mask,
)
from .prox import soft_threshold, svd_shrink
from .solvers import (
    FpcConfig,
    MsbConfig,
    RecoveryResult,
    SolverDivergence,
    SvtConfig,
    fpc_solve,
    msb_solve,
    msb_z_update,
    solve,
    svt_solve,
)

__version__ = "0.1.0"

__all__ = [
    "FpcConfig",
    "GeneralOperator",
    "MsbConfig",
    "NumericalError",
    "RecoveryResult",
    "SamplingMask",
    "SolverDivergence",
    "SvdFactorization",
    "SvtConfig",
    "adjoint",
    "apply",
    "as_matrix",
    "fpc_solve",
    "frobenius_norm",
    "msb_solve",
    "msb_z_update",
    "nmse",
    "nuclear_norm",
    "random_mask",
    "soft_threshold",
    "solve",
    "svd",
    "svd_shrink",
    "svt_solve",
]
