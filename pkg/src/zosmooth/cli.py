"""Command-line benchmark harness.

Subcommands
-----------
moments   Second-moment scaling table for the estimators across dimensions.
run       One benchmark from a JSON config; writes raw rows and, optionally,
          per-iterate trajectory dumps.
compare   Estimator grid under an equal oracle budget; writes raw rows and a
          mean/stddev aggregate table.
dd        Market problem under both decision-dependent protocols; writes raw
          rows and the convergence-target report.

Common flags: ``--config <path>``, ``--seed <u64>`` (overrides the config's
base seed), ``--out <dir>`` (also via the ZOSMOOTH_OUT environment
variable), ``--jobs <count>``.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .estimators import (
    ESTIMATORS,
    SmoothingParams,
    StochasticOracle,
    second_moment_probe,
)
from .rng import RandomStream

DEFAULT_DD_CONFIG = {
    "problem": "market",
    "problem_params": {},
    "estimators": ["esgs_dd_known", "esgs_dd_unknown"],
    "iterations": {"esgs_dd_known": 150_000, "esgs_dd_unknown": 25_000},
    "replications": 20,
    "base_seed": 20240,
}


def _load_config(args) -> bench.BenchConfig:
    if args.config is None:
        raise bench.ConfigError("this subcommand requires --config <path>")
    config = bench.BenchConfig.from_json(args.config)
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    return config


def _cmd_moments(args) -> int:
    dims = [int(d) for d in args.dims.split(",")]
    samples = args.samples
    out = bench.output_dir(None, args.out)
    path = out / "moments.csv"
    eta = 0.05
    with path.open("w", newline="") as fh:
        fh.write("estimator,n,l0,samples,second_moment,bound_linear_n\n")
        for n in dims:
            # unit-Lipschitz linear test function: only coordinate 1 matters
            oracle = StochasticOracle(
                eval=lambda x, xi: float(x[0]),
                noise_sampler=lambda stream: None,
                lipschitz_l0=1.0,
            )
            x = np.zeros(n)
            for kind, estimator in ESTIMATORS.items():
                stream = RandomStream(args.seed or 7, substream_id=n)
                probe = second_moment_probe(
                    estimator, oracle, x, SmoothingParams(eta), samples, stream
                )
                bound = 4.0 / np.pi * n
                fh.write(f"{kind},{n},1.0,{samples},{probe!r},{bound!r}\n")
    print(f"wrote {path}")
    return 0


def _cmd_run(args) -> int:
    config = _load_config(args)
    rows, summary = bench.run_benchmark(config, jobs=args.jobs)
    out = bench.output_dir(config.output, args.out)
    bench.emit_csv(rows, out / "results.csv")
    if config.record_trajectories:
        problem = bench.build_problem(config)
        schedule = bench.resolve_schedule(config.schedule, problem)
        for kind in config.estimators:
            iters = bench.budget_iterations(
                kind, config.iterations[kind], problem.n
            )
            stream = bench._replication_stream(config, kind, 0)
            trajectory = bench.run_problem(
                problem, kind, schedule, iters, stream, record_iterates=True
            )
            bench.emit_trajectory(trajectory, problem, out / f"trajectory_{kind}.csv")
    for kind in config.estimators:
        print(
            f"{kind}: mean error {summary.mean_error[kind]:.6g}, "
            f"mean time {summary.mean_wall_time_ms[kind]:.1f} ms"
        )
    print(f"wrote {out / 'results.csv'}")
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args)
    rows, summary = bench.run_benchmark(config, jobs=args.jobs)
    out = bench.output_dir(config.output, args.out)
    bench.emit_csv(rows, out / "results.csv")
    bench.emit_aggregate_csv(rows, out / "aggregate.csv")
    for kind in config.estimators:
        print(
            f"{kind}: mean error {summary.mean_error[kind]:.6g}, "
            f"mean time {summary.mean_wall_time_ms[kind]:.1f} ms"
        )
    print(f"wrote {out / 'results.csv'} and {out / 'aggregate.csv'}")
    return 0


def _cmd_dd(args) -> int:
    if args.config is not None:
        config = _load_config(args)
    else:
        config = bench.BenchConfig.from_dict(DEFAULT_DD_CONFIG)
        if args.seed is not None:
            config = replace(config, base_seed=args.seed)
    rows, report = bench.run_dd_benchmark(config, jobs=args.jobs)
    out = bench.output_dir(config.output, args.out)
    path = out / "dd_results.csv"
    with path.open("w", newline="") as fh:
        fh.write(
            "mode,replication,final_x1,dist_to_optimum,dist_to_stable,"
            "wall_time_ms,oracle_calls,seed\n"
        )
        for row in rows:
            fh.write(
                f"{row.mode},{row.replication},{row.final_x1!r},"
                f"{row.dist_to_optimum!r},{row.dist_to_stable!r},"
                f"{row.wall_time_ms},{row.oracle_calls},{row.seed}\n"
            )
    print(json.dumps(report, indent=2))
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zosmooth-bench",
        description="Zeroth-order optimization benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel replications")

    p_moments = sub.add_parser("moments", help="second-moment scaling table")
    common(p_moments)
    p_moments.add_argument(
        "--dims", type=str, default="10,50,200", help="comma-separated dimensions"
    )
    p_moments.add_argument("--samples", type=int, default=20_000)
    p_moments.set_defaults(func=_cmd_moments)

    p_run = sub.add_parser("run", help="single benchmark run")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_compare = sub.add_parser("compare", help="estimator grid at equal budget")
    common(p_compare)
    p_compare.set_defaults(func=_cmd_compare)

    p_dd = sub.add_parser("dd", help="decision-dependent market benchmark")
    common(p_dd)
    p_dd.set_defaults(func=_cmd_dd)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (bench.ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
