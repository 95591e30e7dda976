import csv
import json

import numpy as np
import pytest

from zosmooth.bench import (
    BenchConfig,
    ConfigError,
    budget_iterations,
    emit_aggregate_csv,
    emit_csv,
    run_benchmark,
    run_dd_benchmark,
    run_problem,
    emit_trajectory,
)
from zosmooth.cli import main as cli_main
from zosmooth.problems import quad_l1_problem, error_metric
from zosmooth.rng import RandomStream


def small_config(**overrides):
    raw = {
        "problem": "quad_l1",
        "problem_params": {"n": 2, "seed": 3},
        "estimators": ["esgs", "gs"],
        "iterations": 1,
        "replications": 1,
        "base_seed": 7,
    }
    raw.update(overrides)
    return BenchConfig.from_dict(raw)


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            BenchConfig.from_dict(
                {
                    "problem": "quad_l1",
                    "estimators": ["esgs"],
                    "iterations": 1,
                    "replications": 1,
                    "base_seed": 0,
                    "typo_key": 1,
                }
            )

    def test_missing_key_rejected(self):
        with pytest.raises(ConfigError, match="missing config key"):
            BenchConfig.from_dict({"problem": "quad_l1"})

    def test_unknown_estimator_rejected(self):
        with pytest.raises(ConfigError, match="unknown estimator"):
            small_config(estimators=["esgs", "newton"])

    def test_unknown_problem_rejected(self):
        with pytest.raises(ConfigError, match="unknown problem"):
            small_config(problem="rosenbrock")

    def test_unknown_schedule_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown schedule keys"):
            small_config(schedule={"kind": "custom", "alpha": 0.5, "beta": 0.5, "lr": 1})

    def test_per_estimator_iterations(self):
        config = small_config(iterations={"esgs": 5, "gs": 3})
        assert config.iterations == {"esgs": 5, "gs": 3}
        with pytest.raises(ConfigError, match="missing"):
            small_config(iterations={"esgs": 5})

    def test_json_parse_error_has_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"problem": }')
        with pytest.raises(ConfigError, match="line 1"):
            BenchConfig.from_json(path)


class TestBudget:
    def test_equal_budget_rule(self):
        assert budget_iterations("esgs", 200, 50) == 200
        assert budget_iterations("gs", 200, 50) == 10_000
        assert budget_iterations("spherical", 200, 50) == 10_000
        assert budget_iterations("spsa", 200, 50) == 10_000

    def test_minimal_run_consumes_equal_calls(self):
        rows, _ = run_benchmark(small_config())
        calls = {row.estimator: row.oracle_calls for row in rows}
        assert calls == {"esgs": 4, "gs": 4}


class TestDeterminismAndOrdering:
    def test_rerun_identical_modulo_wall_time(self):
        config = small_config(iterations=20, replications=3)
        rows_a, _ = run_benchmark(config)
        rows_b, _ = run_benchmark(config)
        strip = lambda row: (row.problem, row.n, row.estimator, row.replication,
                             row.error, row.oracle_calls, row.seed)
        assert [strip(r) for r in rows_a] == [strip(r) for r in rows_b]

    def test_jobs_do_not_change_results(self):
        config = small_config(iterations=20, replications=4)
        rows_a, _ = run_benchmark(config, jobs=1)
        rows_b, _ = run_benchmark(config, jobs=2)
        errors = lambda rows: {(r.estimator, r.replication): r.error for r in rows}
        assert errors(rows_a) == errors(rows_b)

    def test_replication_permutation_leaves_aggregates_unchanged(self):
        config = small_config(iterations=20, replications=5)
        rows, summary = run_benchmark(config)
        rng = np.random.default_rng(0)
        for kind in ("esgs", "gs"):
            group = [r.error for r in rows if r.estimator == kind]
            permuted = list(rng.permutation(group))
            assert abs(sum(permuted) / len(permuted) - summary.mean_error[kind]) < 1e-12


class TestCsvOutput:
    def test_empty_rows_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path)
        assert path.read_text() == (
            "problem,n,estimator,replication,error,wall_time_ms,oracle_calls,seed\n"
        )

    def test_round_trip(self, tmp_path):
        rows, _ = run_benchmark(small_config(iterations=5, replications=2))
        path = tmp_path / "rows.csv"
        emit_csv(rows, path)
        with path.open() as fh:
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == len(rows)
        for row, rec in zip(rows, parsed):
            assert rec["problem"] == row.problem
            assert int(rec["n"]) == row.n
            assert rec["estimator"] == row.estimator
            assert int(rec["replication"]) == row.replication
            assert float(rec["error"]) == row.error
            assert int(rec["oracle_calls"]) == row.oracle_calls
            assert int(rec["seed"]) == row.seed
        assert path.read_text().endswith("\n")

    def test_aggregate_matches_manual_recomputation(self, tmp_path):
        rows, _ = run_benchmark(small_config(iterations=10, replications=4))
        path = tmp_path / "agg.csv"
        emit_aggregate_csv(rows, path)
        with path.open() as fh:
            parsed = {rec["estimator"]: rec for rec in csv.DictReader(fh)}
        for kind in ("esgs", "gs"):
            errors = np.array([r.error for r in rows if r.estimator == kind])
            assert abs(float(parsed[kind]["mean_error"]) - errors.mean()) < 1e-12
            assert abs(float(parsed[kind]["stddev_error"]) - errors.std(ddof=0)) < 1e-12
            assert int(parsed[kind]["replications"]) == 4

    def test_trajectory_dump(self, tmp_path):
        problem = quad_l1_problem(2, 3)
        schedule = problem.default_schedule
        traj = run_problem(
            problem, "esgs", schedule, 1, RandomStream(5), record_iterates=True
        )
        path = tmp_path / "traj.csv"
        emit_trajectory(traj, problem, path)
        with path.open() as fh:
            parsed = list(csv.DictReader(fh))
        assert len(parsed) == 2  # k = 0, 1
        assert float(parsed[0]["error"]) == pytest.approx(
            error_metric(problem, problem.x0)
        )
        calls = [int(rec["oracle_calls"]) for rec in parsed]
        assert calls == sorted(calls)
        assert calls[0] == 0 and calls[-1] == 4


class TestHeadToHeadSmall:
    def test_esgs_beats_gs_on_small_quadratic(self):
        config = BenchConfig.from_dict(
            {
                "problem": "quad_l1",
                "problem_params": {"n": 10, "seed": 11},
                "estimators": ["esgs", "gs"],
                "iterations": 200,
                "replications": 20,
                "base_seed": 123,
            }
        )
        _, summary = run_benchmark(config)
        assert summary.mean_error["esgs"] < summary.mean_error["gs"]


class TestDDBenchmark:
    def test_zero_iterations_measures_start(self):
        config = BenchConfig.from_dict(
            {
                "problem": "market",
                "estimators": ["esgs_dd_known", "esgs_dd_unknown"],
                "iterations": 0,
                "replications": 1,
                "base_seed": 5,
            }
        )
        rows, _ = run_dd_benchmark(config)
        problem_star = np.array([4.5 / 1.4, 2.7 / 0.8])
        for row in rows:
            assert row.dist_to_optimum == pytest.approx(
                float(np.linalg.norm(problem_star))
            )
            assert row.oracle_calls == 0

    def test_beta_zero_targets_coincide(self):
        config = BenchConfig.from_dict(
            {
                "problem": "market",
                "problem_params": {"beta": 0.0},
                "estimators": ["esgs_dd_unknown"],
                "iterations": 500,
                "replications": 2,
                "base_seed": 5,
            }
        )
        rows, _ = run_dd_benchmark(config)
        for row in rows:
            assert row.dist_to_optimum == row.dist_to_stable

    def test_requires_dd_oracle(self):
        config = small_config(estimators=["esgs_dd_known"])
        with pytest.raises(ConfigError, match="known-density"):
            run_benchmark(config)


class TestCli:
    def write_config(self, tmp_path, raw):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(raw))
        return path

    def test_compare_subcommand(self, tmp_path, capsys):
        config = self.write_config(
            tmp_path,
            {
                "problem": "quad_l1",
                "problem_params": {"n": 3, "seed": 1},
                "estimators": ["esgs", "gs"],
                "iterations": 10,
                "replications": 2,
                "base_seed": 9,
            },
        )
        out = tmp_path / "out"
        code = cli_main(["compare", "--config", str(config), "--out", str(out)])
        assert code == 0
        assert (out / "results.csv").exists()
        assert (out / "aggregate.csv").exists()

    def test_run_subcommand_with_trajectories(self, tmp_path):
        config = self.write_config(
            tmp_path,
            {
                "problem": "nonconvex_min",
                "problem_params": {"n": 3},
                "estimators": ["esgs"],
                "schedule": {"kind": "nonconvex_asymptotic", "alpha": 0.9, "beta": 0.3},
                "iterations": 10,
                "replications": 1,
                "base_seed": 2,
                "record_trajectories": True,
            },
        )
        out = tmp_path / "out"
        code = cli_main(["run", "--config", str(config), "--out", str(out)])
        assert code == 0
        assert (out / "trajectory_esgs.csv").exists()

    def test_dd_subcommand_small(self, tmp_path):
        config = self.write_config(
            tmp_path,
            {
                "problem": "market",
                "estimators": ["esgs_dd_unknown"],
                "iterations": 50,
                "replications": 2,
                "base_seed": 3,
            },
        )
        out = tmp_path / "out"
        code = cli_main(["dd", "--config", str(config), "--out", str(out)])
        assert code == 0
        assert (out / "dd_results.csv").exists()

    def test_moments_subcommand(self, tmp_path):
        out = tmp_path / "out"
        code = cli_main(
            ["moments", "--dims", "4,8", "--samples", "500", "--out", str(out),
             "--seed", "1"]
        )
        assert code == 0
        with (out / "moments.csv").open() as fh:
            parsed = list(csv.DictReader(fh))
        assert {rec["estimator"] for rec in parsed} == {"esgs", "gs", "spherical", "spsa"}

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        config = self.write_config(tmp_path, {"problem": "quad_l1"})
        code = cli_main(["run", "--config", str(config)])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_env_var_output_override(self, tmp_path, monkeypatch):
        env_dir = tmp_path / "env_out"
        monkeypatch.setenv("ZOSMOOTH_OUT", str(env_dir))
        config = self.write_config(
            tmp_path,
            {
                "problem": "quad_l1",
                "problem_params": {"n": 2, "seed": 1},
                "estimators": ["esgs"],
                "iterations": 2,
                "replications": 1,
                "base_seed": 4,
            },
        )
        assert cli_main(["run", "--config", str(config)]) == 0
        assert (env_dir / "results.csv").exists()
