"""Collaborative filtering evaluation on MovieLens-style rating files.

Each split holds out a random share of the ratings, completes the
user x item matrix from the rest with one of the solvers and reports the
mean absolute error on the held-out ratings.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matrix_core import NumericalError
from .operators import SamplingMask
from .solvers import SOLVERS, SolverDivergence, solve

log = logging.getLogger(__name__)

MOVIELENS_100K = {"n_ratings": 100_000, "n_users": 943, "n_items": 1682}
VALID_RATINGS = (1, 2, 3, 4, 5)


class DatasetError(ValueError):
    """Malformed or inconsistent rating data."""


@dataclass(frozen=True, eq=False)
class RatingDataset:
    """Ratings as parallel arrays of 0-based user and item indices."""

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray

    def __post_init__(self):
        users = np.asarray(self.users, dtype=np.int64)
        items = np.asarray(self.items, dtype=np.int64)
        ratings = np.asarray(self.ratings, dtype=np.float64)
        if not (users.shape == items.shape == ratings.shape) or users.ndim != 1:
            raise DatasetError("users, items and ratings must be 1-D arrays of equal length")
        if self.n_users < 1 or self.n_items < 1:
            raise DatasetError("n_users and n_items must be positive")
        if users.size and (users.min() < 0 or users.max() >= self.n_users
                           or items.min() < 0 or items.max() >= self.n_items):
            raise DatasetError("user or item index out of range")
        if not np.isin(ratings, VALID_RATINGS).all():
            raise DatasetError("ratings must be integers in 1..5")
        key = items * self.n_users + users
        if np.unique(key).size != key.size:
            raise DatasetError("duplicate (user, item) pair")
        for name, arr in (("users", users), ("items", items), ("ratings", ratings)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return int(self.ratings.size)

    @property
    def triples(self) -> list[tuple[int, int, int]]:
        return list(zip(self.users.tolist(), self.items.tolist(),
                        self.ratings.astype(int).tolist()))

    def subset(self, index: np.ndarray) -> "RatingDataset":
        return RatingDataset(self.n_users, self.n_items, self.users[index],
                             self.items[index], self.ratings[index])

    def as_observations(self) -> tuple[SamplingMask, np.ndarray]:
        """Sampling mask over the ``n_users x n_items`` grid and its rating vector."""
        linear = self.items * self.n_users + self.users
        order = np.argsort(linear, kind="stable")
        mask = SamplingMask(self.n_users, self.n_items, linear[order])
        return mask, self.ratings[order]


def load_movielens(path, n_users: Optional[int] = None,
                   n_items: Optional[int] = None) -> RatingDataset:
    """Read a ``u.data`` file: ``user<TAB>item<TAB>rating<TAB>timestamp`` with 1-based ids.

    Grid size defaults to the largest user and item ids present.

    Raises
    ------
    DatasetError
        On a malformed line (reported with its line number), a rating
        outside 1..5, or a duplicated (user, item) pair.
    """
    users, items, ratings = [], [], []
    seen: dict[tuple[int, int], int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise DatasetError(f"{path}:{lineno}: expected 4 tab-separated fields, "
                                   f"got {len(parts)}")
            try:
                u, i, r = int(parts[0]), int(parts[1]), int(parts[2])
                int(parts[3])
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-integer field in {line.strip()!r}") from None
            if u < 1 or i < 1:
                raise DatasetError(f"{path}:{lineno}: ids are 1-based, got user={u} item={i}")
            if r not in VALID_RATINGS:
                raise DatasetError(f"{path}:{lineno}: rating {r} outside 1..5")
            if (u, i) in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate rating for user {u}, "
                                   f"item {i} (first on line {seen[(u, i)]})")
            seen[(u, i)] = lineno
            users.append(u - 1)
            items.append(i - 1)
            ratings.append(r)
    if not ratings:
        raise DatasetError(f"{path}: no ratings")
    users_a = np.asarray(users)
    items_a = np.asarray(items)
    nu = int(users_a.max()) + 1 if n_users is None else int(n_users)
    ni = int(items_a.max()) + 1 if n_items is None else int(n_items)
    return RatingDataset(nu, ni, users_a, items_a, np.asarray(ratings, dtype=np.float64))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    n_splits: int = 50
    rng_seed: int = 0
    clamp_range: Optional[tuple[float, float]] = (1.0, 5.0)

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if int(self.n_splits) < 1:
            raise ValueError("n_splits must be >= 1")
        if self.clamp_range is not None and not self.clamp_range[0] <= self.clamp_range[1]:
            raise ValueError("clamp_range must be (low, high) with low <= high")


def split_seed(rng_seed: int, split_idx: int) -> int:
    digest = hashlib.blake2b(f"{int(rng_seed)}|split|{int(split_idx)}".encode(),
                             digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def split(ds: RatingDataset, spec: SplitSpec, split_idx: int):
    """Uniform random train/test partition; ``|train| = round(train_fraction * |ds|)``."""
    if not 0 <= split_idx < spec.n_splits:
        raise ValueError(f"split_idx must lie in [0, {spec.n_splits}), got {split_idx}")
    n = len(ds)
    n_train = int(round(spec.train_fraction * n))
    perm = np.random.default_rng(split_seed(spec.rng_seed, split_idx)).permutation(n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))


def mean_absolute_error(predictions, truth, clamp_range=None) -> float:
    pred = np.asarray(predictions, dtype=np.float64)
    if clamp_range is not None:
        pred = np.clip(pred, clamp_range[0], clamp_range[1])
    return float(np.mean(np.abs(pred - np.asarray(truth, dtype=np.float64))))


@dataclass
class SplitResult:
    split_idx: int
    seed: int
    mae: float
    iterations: int
    converged: bool
    wall_seconds: float = 0.0
    error: Optional[str] = None


@dataclass
class MaeReport:
    splits: list[SplitResult] = field(default_factory=list)

    @property
    def ok(self) -> list[SplitResult]:
        return [s for s in self.splits if s.error is None]

    @property
    def failures(self) -> int:
        return len(self.splits) - len(self.ok)

    @property
    def mean_mae(self) -> float:
        ok = self.ok
        return float(np.mean([s.mae for s in ok])) if ok else math.nan


def evaluate_split(ds: RatingDataset, spec: SplitSpec, split_idx: int,
                   solver: str = "msb", config=None) -> SplitResult:
    train, test = split(ds, spec, split_idx)
    mask, y = train.as_observations()
    seed = split_seed(spec.rng_seed, split_idx)
    start = time.perf_counter()
    try:
        result = solve(solver, mask, y, config)
    except (SolverDivergence, NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        log.warning("split %d: %s failed: %s", split_idx, solver, exc)
        return SplitResult(split_idx, seed, math.nan, 0, False,
                           time.perf_counter() - start, error=str(exc))
    wall = time.perf_counter() - start
    pred = result.z_final[test.users, test.items]
    mae = mean_absolute_error(pred, test.ratings, spec.clamp_range)
    return SplitResult(split_idx, seed, mae, result.iterations_used, result.converged, wall)


def _split_task(args):
    return evaluate_split(*args)


def evaluate_mae(ds: RatingDataset, spec: SplitSpec, solver: str = "msb", config=None,
                 workers: int = 1, n_splits: Optional[int] = None) -> MaeReport:
    """Per-split MAE for the first `n_splits` splits (all of ``spec.n_splits`` by default).

    Splits whose solve fails are kept in the report with their error and
    left out of :attr:`MaeReport.mean_mae`.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; choose from {SOLVERS}")
    count = spec.n_splits if n_splits is None else min(int(n_splits), spec.n_splits)
    tasks = [(ds, spec, k, solver, config) for k in range(count)]
    if workers > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_split_task, tasks))
    else:
        results = [_split_task(t) for t in tasks]
    report = MaeReport(results)
    if report.failures:
        log.warning("%d of %d splits failed and were excluded from the mean",
                    report.failures, count)
    return report


def write_mae_csv(path, report: MaeReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["split_idx", "seed", "mae", "iterations", "converged"])
        for s in report.splits:
            mae = "" if s.error is not None else f"{s.mae:.6f}"
            w.writerow([s.split_idx, s.seed, mae, s.iterations, str(s.converged).lower()])
        w.writerow(["mean", "", f"{report.mean_mae:.6f}", "", ""])
