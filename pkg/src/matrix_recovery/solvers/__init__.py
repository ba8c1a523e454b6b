"""Nuclear-norm recovery solvers: Split Bregman (MSB), SVT and FPC."""

from .common import RecoveryResult, SolverDivergence
from .fpc import FpcConfig, fpc_solve
from .lsq import CglsInfo, cgls_regularized
from .msb import MsbConfig, msb_solve, msb_z_update
from .svt import SvtConfig, svt_solve

SOLVERS = ("msb", "svt", "fpc")

_DISPATCH = {
    "msb": (msb_solve, MsbConfig),
    "svt": (svt_solve, SvtConfig),
    "fpc": (fpc_solve, FpcConfig),
}


def default_config(name: str):
    """Default configuration object for solver `name`."""
    try:
        return _DISPATCH[name][1]()
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {SOLVERS}") from None


def solve(name: str, op, y, config=None) -> RecoveryResult:
    """Run solver `name` ('msb', 'svt' or 'fpc') with `config` or its defaults."""
    try:
        fn, cfg_cls = _DISPATCH[name]
    except KeyError:
        raise ValueError(f"unknown solver {name!r}; choose from {SOLVERS}") from None
    return fn(op, y, cfg_cls() if config is None else config)


__all__ = [
    "CglsInfo",
    "FpcConfig",
    "MsbConfig",
    "RecoveryResult",
    "SOLVERS",
    "SolverDivergence",
    "SvtConfig",
    "cgls_regularized",
    "default_config",
    "fpc_solve",
    "msb_solve",
    "msb_z_update",
    "solve",
    "svt_solve",
]
