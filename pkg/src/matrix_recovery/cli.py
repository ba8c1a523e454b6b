"""Command-line entry point: ``matrix-recovery {recover,synth-bench,cf-eval}``.

Exit codes: 0 success, 1 usage or input error, 2 solver/runtime failure.
Every command prints its fully resolved configuration before running.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import bench, cf
from .matrix_core import NumericalError, write_matrix_csv
from .operators import read_observations
from .solvers import SOLVERS, FpcConfig, MsbConfig, SolverDivergence, SvtConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(kind):
    def parse(text):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None
    return parse


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver options (unset flags keep each solver's default)")
    g.add_argument("--lambda1", type=float, default=0.001,
                   help="MSB nuclear-norm weight (default: %(default)s)")
    g.add_argument("--eta", type=float, default=0.001,
                   help="MSB augmented-Lagrangian weight (default: %(default)s)")
    g.add_argument("--threshold-factor", type=float, default=4.0,
                   help="MSB shrinkage threshold is factor*lambda1/eta (default: %(default)s)")
    g.add_argument("--tau", type=float, default=None,
                   help="SVT threshold (default: 5*sqrt(rows*cols))")
    g.add_argument("--delta", type=float, default=None,
                   help="SVT step size (default: 1.2*rows*cols/N)")
    g.add_argument("--mu-final", type=float, default=0.01,
                   help="FPC final mu (default: %(default)s)")
    g.add_argument("--tau-step", type=float, default=1.0,
                   help="FPC gradient step (default: %(default)s)")
    g.add_argument("--max-iters", type=int, default=500,
                   help="iteration cap: MSB outer, SVT, FPC inner per stage "
                        "(default: %(default)s)")
    g.add_argument("--tol", type=float, default=None,
                   help="stopping tolerance; defaults: MSB objective change 1e-7, "
                        "SVT relative residual 1e-4, FPC relative change 1e-3")


def solver_config(name: str, args) -> object:
    try:
        if name == "msb":
            kw = dict(lambda1=args.lambda1, eta=args.eta,
                      threshold_factor=args.threshold_factor, max_outer_iters=args.max_iters)
            if args.tol is not None:
                kw["obj_tol"] = args.tol
            return MsbConfig(**kw)
        if name == "svt":
            kw = dict(tau=args.tau, step_delta=args.delta, max_iters=args.max_iters)
            if args.tol is not None:
                kw["residual_tol"] = args.tol
            return SvtConfig(**kw)
        if name == "fpc":
            kw = dict(mu_final=args.mu_final, tau_step=args.tau_step,
                      max_inner_iters=args.max_iters)
            if args.tol is not None:
                kw["inner_tol"] = args.tol
            return FpcConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown solver {name!r}")


def _echo(command: str, **config) -> None:
    def plain(v):
        if dataclasses.is_dataclass(v):
            return dataclasses.asdict(v)
        if isinstance(v, dict):
            return {k: plain(x) for k, x in v.items()}
        if isinstance(v, Path):
            return str(v)
        return v
    resolved = {k: plain(v) for k, v in config.items()}
    print(f"# {command} config: {json.dumps(resolved, sort_keys=True, default=str)}",
          flush=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matrix-recovery",
                     description="Low-rank matrix recovery and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("recover", help="complete a matrix from observed entries",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--observations", required=True, type=Path,
                   help="text file of 0-based 'row,col,value' lines")
    p.add_argument("--rows", required=True, type=int)
    p.add_argument("--cols", required=True, type=int)
    p.add_argument("--solver", choices=SOLVERS, default="msb")
    p.add_argument("--out", required=True, type=Path, help="output CSV for the recovered matrix")
    _add_solver_flags(p)

    p = sub.add_parser("synth-bench", help="synthetic success-rate / NMSE / timing sweep",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--ranks", type=_csv_list(int), default=[5, 10, 20, 30, 40],
                   help="comma-separated ranks")
    p.add_argument("--ratios", type=_csv_list(float), default=[0.2, 0.4, 0.6, 0.8],
                   help="comma-separated sampling ratios")
    p.add_argument("--trials", type=int, default=100, help="trials per (rank, ratio) cell")
    p.add_argument("--size", type=int, default=250, help="square matrix dimension")
    p.add_argument("--solvers", type=_csv_list(str), default=list(SOLVERS),
                   help="comma-separated solver names")
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="std of Gaussian noise on observations")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--workers", type=int, default=bench.default_workers(),
                   help="worker processes")
    p.add_argument("--out-dir", type=Path, default=Path("."))

    p = sub.add_parser("cf-eval", help="MovieLens MAE over random train/test splits",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--data", required=True, type=Path, help="MovieLens u.data file")
    p.add_argument("--splits", type=int, default=50, help="number of random splits")
    p.add_argument("--train-fraction", type=float, default=0.8,
                   help="fraction of ratings used for training")
    p.add_argument("--solver", choices=SOLVERS, default="msb")
    p.add_argument("--no-clamp", action="store_true",
                   help="score raw predictions instead of clamping to [1, 5]")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--workers", type=int, default=bench.default_workers(),
                   help="worker processes")
    p.add_argument("--out", type=Path, default=Path("cf_mae.csv"))
    _add_solver_flags(p)
    return parser


def cmd_recover(args) -> int:
    if args.rows < 1 or args.cols < 1:
        raise UsageError("--rows and --cols must be positive")
    cfg = solver_config(args.solver, args)
    try:
        mask, y = read_observations(args.observations, args.rows, args.cols)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if isinstance(cfg, SvtConfig):
        cfg = cfg.resolve(mask)
    _echo("recover", observations=args.observations, rows=args.rows, cols=args.cols,
          n_observed=mask.n_measurements, solver=args.solver, config=cfg, out=args.out)
    result = solve(args.solver, mask, y, cfg)
    write_matrix_csv(args.out, result.z_final)
    print(f"iterations: {result.iterations_used}")
    print(f"converged: {str(result.converged).lower()}")
    print(f"final_objective: {result.final_objective:.10e}")
    print(f"constraint_gap: {result.constraint_gap:.6e}")
    return EXIT_OK


def cmd_synth_bench(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    for s in args.solvers:
        if s not in SOLVERS:
            raise UsageError(f"unknown solver {s!r}; choose from {', '.join(SOLVERS)}")
    try:
        spec = bench.SynthSpec(rows=args.size, cols=args.size, ranks=tuple(args.ranks),
                               sampling_ratios=tuple(args.ratios), trials=args.trials,
                               noise_sigma=args.noise_sigma, base_seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    configs = {s: SvtConfig() if s == "svt" else (MsbConfig() if s == "msb" else FpcConfig())
               for s in args.solvers}
    _echo("synth-bench", spec=spec, solvers=args.solvers, configs=configs,
          workers=args.workers, out_dir=args.out_dir)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    records, summary = bench.run_sweep(spec, args.solvers, workers=args.workers,
                                       configs=configs)
    bench.write_records_csv(args.out_dir / "records.csv", records)
    bench.write_summary_csv(args.out_dir / "summary.csv", summary)
    for row in summary:
        print(f"{row['solver']:>4} rank={row['rank']:<3} ratio={row['sampling_ratio']:<4g} "
              f"mean_nmse={row['mean_nmse']:.3e} median_nmse={row['median_nmse']:.3e} "
              f"success={row['success_rate']:.2f} time={row['mean_wall_seconds']:.2f}s")
    return EXIT_OK


def cmd_cf_eval(args) -> int:
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        spec = cf.SplitSpec(train_fraction=args.train_fraction, n_splits=args.splits,
                            rng_seed=args.seed,
                            clamp_range=None if args.no_clamp else (1.0, 5.0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = solver_config(args.solver, args)
    try:
        ds = cf.load_movielens(args.data)
    except (OSError, cf.DatasetError) as exc:
        raise UsageError(str(exc)) from None
    if isinstance(cfg, SvtConfig):
        cfg = cfg.resolve(ds.as_observations()[0])
    _echo("cf-eval", data=args.data, n_ratings=len(ds), n_users=ds.n_users,
          n_items=ds.n_items, split=spec, solver=args.solver, config=cfg,
          workers=args.workers, out=args.out)
    report = cf.evaluate_mae(ds, spec, args.solver, cfg, workers=args.workers)
    cf.write_mae_csv(args.out, report)
    for s in report.splits:
        status = f"mae={s.mae:.4f}" if s.error is None else f"FAILED ({s.error})"
        print(f"split {s.split_idx}: {status} iterations={s.iterations}")
    print(f"mean MAE: {report.mean_mae:.4f} over {len(report.ok)} splits"
          + (f" ({report.failures} failed)" if report.failures else ""))
    return EXIT_OK if report.ok else EXIT_RUNTIME


COMMANDS = {"recover": cmd_recover, "synth-bench": cmd_synth_bench, "cf-eval": cmd_cf_eval}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"matrix-recovery {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverDivergence, NumericalError, FloatingPointError) as exc:
        print(f"matrix-recovery {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
