"""Session-wide caches for the expensive benchmark solves used by several test modules."""
import functools
import time

from matrix_recovery import MsbConfig, msb_solve
from matrix_recovery.bench import SynthSpec, make_instance, run_sweep
from matrix_recovery.matrix_core import frobenius_norm, nmse


@functools.lru_cache(maxsize=None)
def sweep(rows, rank, ratio, trials, solver):
    spec = SynthSpec(rows=rows, cols=rows, ranks=(rank,), sampling_ratios=(ratio,), trials=trials)
    records, _ = run_sweep(spec, solvers=(solver,))
    return tuple(records)


@functools.lru_cache(maxsize=None)
def msb_runs(rows, rank, ratio, trials):
    """MSB solves with constraint-gap diagnostics, on the same instances as :func:`sweep`."""
    spec = SynthSpec(rows=rows, cols=rows, ranks=(rank,), sampling_ratios=(ratio,), trials=trials)
    runs = []
    for trial in range(trials):
        _, truth, mask, y = make_instance(spec, rank, ratio, trial)
        start = time.perf_counter()
        res = msb_solve(mask, y, MsbConfig())
        wall = time.perf_counter() - start
        gap = frobenius_norm(res.w_final - res.z_final) / frobenius_norm(res.z_final)
        runs.append({"nmse": nmse(res.z_final, truth), "gap": gap, "wall": wall,
                     "iterations": res.iterations_used, "converged": res.converged})
    return tuple(runs)
