"""
Tests for the command line interface.
"""

import json
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from src.dlasso import __version__
from src.dlasso.cli import cli, main

PROSTATE_PATH = Path(os.environ.get("DLASSO_PROSTATE_CSV", "data/prostate.csv"))


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def csv_path(tmp_path):
    rng = np.random.default_rng(41)
    X = rng.standard_normal((30, 4))
    y = X @ np.array([2.0, 0.0, -1.0, 0.0]) + 0.5 * rng.standard_normal(30)
    frame = pd.DataFrame(X, columns=["a", "b", "c", "d"])
    frame["lpsa"] = y
    path = tmp_path / "train.csv"
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def wide_csv(tmp_path):
    rng = np.random.default_rng(42)
    frame = pd.DataFrame(rng.standard_normal((4, 6)), columns=[f"x{j}" for j in range(6)])
    frame["lpsa"] = rng.standard_normal(4)
    path = tmp_path / "wide.csv"
    frame.to_csv(path, index=False)
    return path


def test_version(runner):
    """Test --version prints the package version."""
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_fit_writes_report(runner, csv_path, tmp_path):
    """Test a dlasso fit writes a JSON report with aliased lambda."""
    out = tmp_path / "fit.json"
    result = runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--s", "0.1", "--lambda", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["method"] == "dlasso"
    assert report["params"] == {"s": 0.1, "lambda": 2.0}
    assert report["n"] == 30 and report["p"] == 4
    assert list(report["coefficients"]) == ["a", "b", "c", "d"]
    assert set(report["active_set"]) <= {"a", "b", "c", "d"}
    assert report["converged"] is True


def test_fit_to_stdout(runner, csv_path):
    """Test the report goes to stdout without --out."""
    result = runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--method", "ols"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["method"] == "ols"
    assert report["params"] == {"s": None, "lambda": None}


def test_fit_tune_lambda(runner, csv_path, tmp_path):
    """Test --tune-lambda records the criterion and its score."""
    out = tmp_path / "fit.json"
    result = runner.invoke(cli, [
        "-q", "fit", "--data", str(csv_path), "--s", "0.05", "--tune-lambda", "bic", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["criterion"] == "bic"
    assert report["score"] is not None
    assert report["params"]["s"] == 0.05


def test_fit_output_dir_env(runner, csv_path, tmp_path):
    """Test DLASSO_OUTPUT_DIR receives the default file name."""
    outdir = tmp_path / "results"
    result = runner.invoke(
        cli, ["-q", "fit", "--data", str(csv_path), "--lambda", "1"],
        env={"DLASSO_OUTPUT_DIR": str(outdir)},
    )
    assert result.exit_code == 0, result.output
    assert (outdir / "fit.json").exists()


def test_fit_usage_errors(runner, csv_path, tmp_path):
    """Test invalid invocations exit with status 1."""
    assert runner.invoke(cli, ["-q", "fit", "--lambda", "1"]).exit_code == 1
    assert runner.invoke(cli, ["-q", "fit", "--data", str(csv_path)]).exit_code == 1
    assert runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--lambda", "1", "--s", "-1"]).exit_code == 1
    assert runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--lambda", "1", "--response", "nope"]).exit_code == 1
    assert runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--lambda", "1", "--tune-lambda", "bic"]).exit_code == 1
    assert runner.invoke(cli, ["-q", "fit", "--data", str(csv_path), "--method", "svm"]).exit_code == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("a,lpsa\n1,2\nx,3\n")
    assert runner.invoke(cli, ["-q", "fit", "--data", str(bad), "--lambda", "1"]).exit_code == 1


def test_fit_computation_errors(runner, csv_path, wide_csv):
    """Test singular systems and --strict non-convergence exit with status 2."""
    result = runner.invoke(cli, ["-q", "fit", "--data", str(wide_csv), "--lambda", "0"])
    assert result.exit_code == 2
    result = runner.invoke(cli, [
        "-q", "fit", "--data", str(csv_path), "--s", "0.01", "--lambda", "20", "--max-iter", "1", "--strict",
    ])
    assert result.exit_code == 2


def test_tune_outputs(runner, csv_path, tmp_path):
    """Test tune writes the score table and the best-fit report."""
    table, out = tmp_path / "scores.csv", tmp_path / "tune.json"
    result = runner.invoke(cli, [
        "-q", "tune", "--data", str(csv_path), "--criterion", "cv5", "--lambdas", "0.1,1,10",
        "--s-values", "0.01,1", "--table", str(table), "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    scores = pd.read_csv(table)
    assert list(scores.columns) == ["lambda", "s", "score", "df_count", "df_trace", "converged", "error"]
    assert len(scores) == 6
    report = json.loads(out.read_text())
    assert report["criterion"] == "cv5"
    assert report["grid_size"] == 6
    assert report["best_fit"]["params"] == report["best"]
    assert all("error" in row for row in report["table"])


def test_tune_unknown_criterion(runner, csv_path):
    """Test an unknown criterion is a usage error."""
    assert runner.invoke(cli, ["-q", "tune", "--data", str(csv_path), "--criterion", "mallows"]).exit_code == 1


def test_tune_all_points_fail(runner, wide_csv):
    """Test a grid with no usable point exits with status 2."""
    result = runner.invoke(cli, ["-q", "tune", "--data", str(wide_csv), "--lambdas", "0", "--s-values", "1"])
    assert result.exit_code == 2


def test_simulate_small(runner, tmp_path):
    """Test a small simulation run and its summary."""
    out, summary = tmp_path / "sim.csv", tmp_path / "summary.csv"
    args = [
        "-q", "simulate", "--scenario", "1", "--replicates", "2", "--seed", "3", "--methods", "ridge,ols",
        "--criterion", "bic", "--lambdas", "0.1,1,10", "--out", str(out), "--summary", str(summary),
    ]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    rows = pd.read_csv(out)
    assert list(rows["method"]) == ["ridge", "ols", "ridge", "ols"]
    assert list(rows["seed"]) == [3, 3, 4, 4]
    first = out.read_bytes()
    assert runner.invoke(cli, args).exit_code == 0
    assert out.read_bytes() == first
    assert list(pd.read_csv(summary)["method"]) == ["ridge", "ols"]


def test_simulate_invalid_method(runner):
    """Test unknown simulation methods are rejected."""
    assert runner.invoke(cli, ["-q", "simulate", "--methods", "scad"]).exit_code == 1


def test_threshold_curve(runner, tmp_path):
    """Test the scalar curve CSV and byte-identical reruns."""
    out = tmp_path / "curve.csv"
    args = ["-q", "threshold-curve", "--lambda", "1", "--s", "0.5", "--ymin", "-1", "--ymax", "1", "--step", "0.5", "--out", str(out)]
    assert runner.invoke(cli, args).exit_code == 0
    text = out.read_text()
    assert text.splitlines()[0] == "y,estimate"
    assert len(text.splitlines()) == 6
    assert "\r" not in text
    first = out.read_bytes()
    runner.invoke(cli, args)
    assert out.read_bytes() == first


def test_threshold_curve_bad_step(runner):
    """Test a non-positive step is a usage error."""
    assert runner.invoke(cli, ["-q", "threshold-curve", "--step", "0"]).exit_code == 1


def test_bench_commands(runner, tmp_path):
    """Test bench-erf without timing and bench-penalty with gaps."""
    erf_out = tmp_path / "erf.csv"
    assert runner.invoke(cli, ["-q", "bench-erf", "--no-timing", "--out", str(erf_out)]).exit_code == 0
    assert list(pd.read_csv(erf_out).columns) == ["kernel", "grid_max_abs_error"]

    curves, gaps = tmp_path / "curves.csv", tmp_path / "gaps.csv"
    result = runner.invoke(cli, [
        "-q", "bench-penalty", "--s-values", "0.1,1", "--num", "21", "--out", str(curves), "--gaps", str(gaps),
    ])
    assert result.exit_code == 0, result.output
    assert len(pd.read_csv(curves)) == 42
    assert list(pd.read_csv(gaps)["s"]) == [0.1, 1.0]


def test_main_exit_codes(tmp_path, wide_csv):
    """Test main returns the documented statuses."""
    out = tmp_path / "curve.csv"
    assert main(["-q", "threshold-curve", "--ymin", "0", "--ymax", "1", "--step", "0.5", "--out", str(out)]) == 0
    assert main(["-q", "fit", "--lambda", "1"]) == 1
    assert main(["-q", "fit", "--data", str(wide_csv), "--lambda", "0"]) == 2


def test_unknown_options_exit_one(runner):
    """Test unknown group and subcommand options are usage errors with status 1."""
    assert main(["--bogus"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["fit", "--bogus"]) == 1
    assert runner.invoke(cli, ["--bogus"]).exit_code == 1


@pytest.mark.skipif(not PROSTATE_PATH.exists(), reason="prostate data not available")
def test_fit_prostate_bic(runner, tmp_path):
    """Test the BIC-tuned lasso-like fit on the prostate data from the command line."""
    out = tmp_path / "prostate.json"
    result = runner.invoke(cli, [
        "-q", "fit", "--data", str(PROSTATE_PATH), "--method", "dlasso", "--s", "0.001",
        "--tune-lambda", "bic", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert set(report["active_set"]) == {"lcavol", "lweight", "lbph", "pgg45", "svi"}
    assert report["df_count"] == 5

    result = runner.invoke(cli, ["-q", "fit", "--data", str(PROSTATE_PATH), "--method", "ols"])
    assert json.loads(result.output)["df_count"] == 8


if __name__ == "__main__":
    pytest.main([__file__])
