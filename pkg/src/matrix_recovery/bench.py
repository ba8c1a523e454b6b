"""Synthetic recovery benchmark: success rate, NMSE and run time sweeps.

A sweep covers every (solver, rank, sampling ratio, trial) cell. Ground
truth, mask and noise for a cell are seeded from
``(base_seed, rank, ratio, trial)`` only, so all solvers are scored on the
same instances and adding a solver leaves existing cells untouched.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .matrix_core import NumericalError, nmse
from .operators import apply, random_mask
from .solvers import SOLVERS, SolverDivergence, solve

log = logging.getLogger(__name__)

RECORD_FIELDS = ("solver", "rank", "sampling_ratio", "trial", "seed", "nmse",
                 "wall_seconds", "iterations", "converged")
SUMMARY_FIELDS = ("solver", "rank", "sampling_ratio", "trials", "mean_nmse",
                  "median_nmse", "success_rate", "mean_wall_seconds")


@dataclass(frozen=True)
class SynthSpec:
    rows: int = 250
    cols: int = 250
    ranks: tuple = (5, 10, 20, 30, 40)
    sampling_ratios: tuple = (0.2, 0.4, 0.6, 0.8)
    trials: int = 100
    success_nmse_threshold: float = 1e-3
    noise_sigma: float = 0.0
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))
        object.__setattr__(self, "sampling_ratios",
                           tuple(float(p) for p in self.sampling_ratios))
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        if not self.ranks or not self.sampling_ratios:
            raise ValueError("need at least one rank and one sampling ratio")
        for r in self.ranks:
            if not 1 <= r < min(self.rows, self.cols):
                raise ValueError(f"rank {r} must satisfy 1 <= rank < min(rows, cols)")
        for p in self.sampling_ratios:
            if not 0.0 < p <= 1.0:
                raise ValueError(f"sampling ratio {p} outside (0, 1]")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        if not self.success_nmse_threshold > 0:
            raise ValueError("success_nmse_threshold must be positive")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class BenchRecord:
    solver: str
    rank: int
    sampling_ratio: float
    trial: int
    seed: int
    nmse: float
    wall_seconds: float
    iterations: int
    converged: bool
    error: Optional[str] = field(default=None, compare=False)

    @property
    def failed(self) -> bool:
        return not math.isfinite(self.nmse)


def generate_low_rank(rows: int, cols: int, rank: int, rng_seed) -> np.ndarray:
    """``L @ R.T`` with i.i.d. standard normal ``L`` (rows x rank) and ``R`` (cols x rank)."""
    if not 1 <= rank <= min(rows, cols):
        raise ValueError(f"rank must lie in [1, {min(rows, cols)}], got {rank}")
    rng = np.random.default_rng(rng_seed)
    left = rng.standard_normal((rows, rank))
    right = rng.standard_normal((cols, rank))
    return left @ right.T


def cell_seed(base_seed: int, rank: int, sampling_ratio: float, trial: int) -> int:
    """Stable 63-bit seed for one problem instance."""
    key = f"{int(base_seed)}|{int(rank)}|{float(sampling_ratio)!r}|{int(trial)}"
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def make_instance(spec: SynthSpec, rank: int, sampling_ratio: float, trial: int):
    """Return ``(seed, truth, mask, y)`` for one benchmark cell."""
    seed = cell_seed(spec.base_seed, rank, sampling_ratio, trial)
    truth_ss, mask_ss, noise_ss = np.random.SeedSequence(seed).spawn(3)
    truth = generate_low_rank(spec.rows, spec.cols, rank, truth_ss)
    mask = random_mask(spec.rows, spec.cols, sampling_ratio, mask_ss)
    y = apply(mask, truth)
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * np.random.default_rng(noise_ss).standard_normal(y.size)
    return seed, truth, mask, y


def run_trial(solver: str, rank: int, sampling_ratio: float, trial: int,
              spec: SynthSpec, config=None) -> BenchRecord:
    """Solve one instance and score it. Solver failures become a record with ``nmse = inf``."""
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    seed, truth, mask, y = make_instance(spec, rank, sampling_ratio, trial)
    start = time.perf_counter()
    try:
        result = solve(solver, mask, y, config)
    except (SolverDivergence, NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        wall = time.perf_counter() - start
        log.warning("%s failed on rank=%d ratio=%g trial=%d: %s",
                    solver, rank, sampling_ratio, trial, exc)
        return BenchRecord(solver, rank, sampling_ratio, trial, seed, math.inf, wall,
                           0, False, error=str(exc))
    wall = time.perf_counter() - start
    return BenchRecord(solver, rank, sampling_ratio, trial, seed,
                       nmse(result.z_final, truth), wall, result.iterations_used,
                       result.converged)


def success_rate(records: Sequence[BenchRecord], threshold: float = 1e-3) -> float:
    """Fraction of records with NMSE strictly below `threshold`."""
    if not records:
        raise ValueError("success_rate needs at least one record")
    return sum(r.nmse < threshold for r in records) / len(records)


def _run_task(args):
    solver, rank, ratio, trial, spec, config = args
    return run_trial(solver, rank, ratio, trial, spec, config)


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_sweep(spec: SynthSpec, solvers: Iterable[str] = SOLVERS, workers: int = 1,
              configs: Optional[dict] = None):
    """Run every (solver, rank, ratio, trial) cell.

    Returns ``(records, summary)``; records are ordered by solver, rank,
    ratio and trial regardless of the order in which workers finish.
    """
    solvers = list(solvers)
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}; choose from {SOLVERS}")
    configs = configs or {}
    tasks = [(s, r, p, t, spec, configs.get(s))
             for s in solvers
             for r in spec.ranks
             for p in spec.sampling_ratios
             for t in range(spec.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        records = [_run_task(t) for t in tasks]
    return records, summarize(records, spec.success_nmse_threshold)


def summarize(records: Sequence[BenchRecord], threshold: float = 1e-3) -> list[dict]:
    """Per-(solver, rank, ratio) aggregates in first-seen order."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.solver, rec.rank, rec.sampling_ratio), []).append(rec)
    rows = []
    for (solver, rank, ratio), recs in groups.items():
        errs = [r.nmse for r in recs]
        rows.append({
            "solver": solver,
            "rank": rank,
            "sampling_ratio": ratio,
            "trials": len(recs),
            "mean_nmse": float(np.mean(errs)),
            "median_nmse": float(statistics.median(errs)),
            "success_rate": success_rate(recs, threshold),
            "mean_wall_seconds": float(np.mean([r.wall_seconds for r in recs])),
        })
    return rows


def _sci(x: float) -> str:
    return "" if not math.isfinite(x) else f"{x:.6e}"


def write_records_csv(path, records: Iterable[BenchRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([r.solver, r.rank, f"{r.sampling_ratio:g}", r.trial, r.seed,
                        _sci(r.nmse), f"{r.wall_seconds:.6f}", r.iterations,
                        str(r.converged).lower()])


def write_summary_csv(path, summary: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_FIELDS)
        for row in summary:
            w.writerow([row["solver"], row["rank"], f"{row['sampling_ratio']:g}",
                        row["trials"], _sci(row["mean_nmse"]), _sci(row["median_nmse"]),
                        f"{row['success_rate']:.4f}", f"{row['mean_wall_seconds']:.6f}"])


def read_records_csv(path) -> list[BenchRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(BenchRecord(
                solver=row["solver"], rank=int(row["rank"]),
                sampling_ratio=float(row["sampling_ratio"]), trial=int(row["trial"]),
                seed=int(row["seed"]),
                nmse=float(row["nmse"]) if row["nmse"] else math.inf,
                wall_seconds=float(row["wall_seconds"]),
                iterations=int(row["iterations"]),
                converged=row["converged"] == "true",
            ))
    return out
