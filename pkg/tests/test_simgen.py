"""
Tests for the simulation scenarios and the replicate pipeline.
"""

import math

import numpy as np
import pytest

from src.dlasso.baselines import fit_ols
from src.dlasso.exceptions import ParameterError, ShapeError
from src.dlasso.model_select import SelectionCriterion
from src.dlasso.preprocessing import Standardizer
from src.dlasso.simgen import (
    FIXED_SHAPE,
    ScenarioId,
    ScenarioSpec,
    ScenarioTruth,
    SimMethod,
    SimulationPlan,
    ar_correlation,
    exchangeable_block,
    generate,
    metrics,
    rows_to_frame,
    run_simulation,
    sample_design,
    scenario_truth,
    summarize,
)


def test_standard_truth():
    """Test the first scenario's coefficients, correlation and noise."""
    truth = scenario_truth(ScenarioId.STANDARD)
    np.testing.assert_array_equal(truth.beta, [3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0])
    assert truth.correlation[0, 2] == pytest.approx(0.25)
    assert truth.correlation[7, 0] == pytest.approx(0.5 ** 7)
    assert truth.sigma == pytest.approx(math.sqrt(3.0))


def test_small_betas_truth():
    """Test the second scenario uses eight coefficients of 0.5."""
    truth = scenario_truth(ScenarioId.SMALL_BETAS)
    np.testing.assert_array_equal(truth.beta, np.full(8, 0.5))
    np.testing.assert_array_equal(truth.correlation, ar_correlation(8, 0.5))


def test_correlated_groups_truth():
    """Test the block structure of the third scenario."""
    truth = scenario_truth(ScenarioId.CORRELATED_GROUPS)
    assert truth.p == 15
    assert truth.sigma == pytest.approx(math.sqrt(15.0))
    np.testing.assert_array_equal(truth.beta[:5], [1.0, 2.0, 3.0, 4.0, 5.0])
    block = truth.correlation[:5, :5]
    assert np.min(np.linalg.eigvalsh(block)) == pytest.approx(0.1, abs=1e-12)
    np.testing.assert_array_equal(truth.correlation[5:10, 5:10], exchangeable_block(5, 0.5))
    np.testing.assert_array_equal(truth.correlation[10:, 10:], np.eye(5))
    assert np.all(truth.correlation[:5, 5:] == 0.0)


@pytest.mark.parametrize("scenario", list(ScenarioId))
def test_correlations_are_positive_definite(scenario):
    """Test every scenario's correlation admits a Cholesky factor."""
    L = scenario_truth(scenario).cholesky()
    np.testing.assert_allclose(L @ L.T, scenario_truth(scenario).correlation, atol=1e-12)


def test_truth_validation():
    """Test malformed truths are rejected."""
    with pytest.raises(ShapeError):
        ScenarioTruth(np.ones(3), np.eye(2), 1.0)
    with pytest.raises(ParameterError):
        ScenarioTruth(np.ones(2), np.array([[1.0, 0.2], [0.3, 1.0]]), 1.0)
    with pytest.raises(ParameterError):
        ScenarioTruth(np.ones(2), np.eye(2), -1.0)


def test_spec_validation():
    """Test split sizes and replicate counts are checked."""
    with pytest.raises(ParameterError):
        ScenarioSpec(n_total=40, n_train=40)
    with pytest.raises(ParameterError):
        ScenarioSpec(replicates=0)
    spec = ScenarioSpec(seed=10)
    assert spec.n_test == 200
    assert spec.replicate_seed(3) == 13


def test_empirical_correlation():
    """Test sampled predictors reproduce 0.5^2 between x1 and x3."""
    truth = scenario_truth(ScenarioId.STANDARD)
    X = sample_design(np.random.default_rng(0), truth, 100_000)
    assert np.corrcoef(X, rowvar=False)[0, 2] == pytest.approx(0.25, abs=0.01)


def test_generate_deterministic():
    """Test the same seed gives bit-identical splits and distinct seeds differ."""
    spec = ScenarioSpec(seed=5)
    truth = scenario_truth(ScenarioId.STANDARD)
    train_a, test_a = generate(spec, truth)
    train_b, test_b = generate(spec, truth)
    np.testing.assert_array_equal(train_a.X, train_b.X)
    np.testing.assert_array_equal(test_a.y, test_b.y)
    other, _ = generate(spec, truth, seed=6)
    assert not np.array_equal(other.X, train_a.X)


def test_generate_split_and_standardization():
    """Test split sizes and that training statistics standardize both splits."""
    spec = ScenarioSpec(seed=1)
    train, test = generate(spec, scenario_truth(ScenarioId.STANDARD))
    assert (train.n, test.n) == (40, 200)
    np.testing.assert_allclose(train.X.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(train.X.std(axis=0, ddof=1), 1.0, rtol=1e-12)
    assert abs(train.y.mean()) <= 1e-12
    assert test.standardization is train.standardization


def test_standardization_idempotent():
    """Test standardizing a standardized training split changes nothing."""
    train, _ = generate(ScenarioSpec(seed=2), scenario_truth(ScenarioId.STANDARD))
    X_again, y_again = Standardizer().fit_transform(train.X, train.y)
    np.testing.assert_allclose(X_again, train.X, atol=1e-12)
    np.testing.assert_allclose(y_again, train.y, atol=1e-12)


def test_noiseless_ols_recovers_truth():
    """Test sigma = 0 gives zero test error for least squares."""
    base = scenario_truth(ScenarioId.STANDARD)
    truth = ScenarioTruth(base.beta, base.correlation, 0.0)
    train, test = generate(ScenarioSpec(seed=3), truth)
    pred_mse, param_mse = metrics(truth, test, fit_ols(train))
    assert pred_mse <= 1e-16
    assert param_mse <= 1e-16


def test_metrics_unit_vector():
    """Test the parameter error is the quadratic form in the true correlation."""
    truth = ScenarioTruth(np.zeros(3), np.eye(3), 1.0)
    train, test = generate(ScenarioSpec(n_total=50, n_train=20, seed=4), truth)
    scale = test.standardization.x_scale
    beta_hat = np.array([1.0, 0.0, 0.0]) * scale
    _, param_mse = metrics(truth, test, beta_hat)
    assert param_mse == pytest.approx(1.0, rel=1e-12)


def test_metrics_double_loop_oracle():
    """Test metrics against explicit loops over rows and correlation entries."""
    truth = scenario_truth(ScenarioId.STANDARD)
    train, test = generate(ScenarioSpec(seed=8), truth)
    beta_hat = np.linspace(-1.0, 2.0, truth.p)
    pred_mse, param_mse = metrics(truth, test, beta_hat)

    total = 0.0
    for i in range(test.n):
        fitted = sum(test.X[i, j] * beta_hat[j] for j in range(test.p))
        total += (test.y[i] - fitted) ** 2
    assert pred_mse == pytest.approx(total / test.n, rel=1e-12)

    coef = beta_hat / test.standardization.x_scale
    quad = 0.0
    for i in range(truth.p):
        for j in range(truth.p):
            quad += (coef[i] - truth.beta[i]) * truth.correlation[i, j] * (coef[j] - truth.beta[j])
    assert param_mse == pytest.approx(quad, rel=1e-12)


def test_metrics_dimension_mismatch():
    """Test a wrong-length coefficient vector raises ShapeError."""
    truth = scenario_truth(ScenarioId.STANDARD)
    _, test = generate(ScenarioSpec(seed=0), truth)
    with pytest.raises(ShapeError):
        metrics(truth, test, np.zeros(3))


def test_plan_grids():
    """Test the fixed-shape method searches lambda only."""
    plan = SimulationPlan(lambdas=[0.1, 1.0], s_values=[0.05, 0.5])
    assert plan.grid_for(SimMethod.DLASSO_FIXED_S, 40).s_values == [FIXED_SHAPE]
    assert plan.grid_for(SimMethod.DLASSO, 40).s_values == [0.05, 0.5]


def test_small_run_frame_and_summary():
    """Test rows are ordered by replicate then method and summarized per method."""
    plan = SimulationPlan(
        methods=[SimMethod.DLASSO_FIXED_S, SimMethod.RIDGE, SimMethod.OLS],
        criterion=SelectionCriterion.parse("bic"),
        lambdas=[0.1, 1.0, 10.0],
    )
    rows = run_simulation(ScenarioSpec(replicates=2, seed=7), plan)
    frame = rows_to_frame(rows)
    assert list(frame["method"]) == ["dlasso.s", "ridge", "ols"] * 2
    assert list(frame["replicate"]) == [0, 0, 0, 1, 1, 1]
    assert list(frame["seed"]) == [7, 7, 7, 8, 8, 8]
    assert frame.loc[frame["method"] == "dlasso.s", "s"].tolist() == [FIXED_SHAPE, FIXED_SHAPE]
    assert frame.loc[frame["method"] == "ols", "lambda"].isna().all()
    summary = summarize(rows)
    assert list(summary["method"]) == ["dlasso.s", "ridge", "ols"]
    assert list(summary["replicates"]) == [2, 2, 2]


@pytest.mark.slow
def test_pipeline_lasso_like_property():
    """Test dlasso at s = 0.01 tracks the lasso and both beat OLS over 50 replicates."""
    plan = SimulationPlan(
        methods=[SimMethod.DLASSO_FIXED_S, SimMethod.LASSO, SimMethod.OLS],
        criterion=SelectionCriterion.parse("cv5"),
        lambdas=list(np.logspace(-1, 2.5, 10)),
    )
    summary = summarize(run_simulation(ScenarioSpec(replicates=50, seed=0), plan)).set_index("method")
    dlasso = summary.loc["dlasso.s", "median_param_mse"]
    lasso = summary.loc["lasso", "median_param_mse"]
    ols = summary.loc["ols", "median_param_mse"]
    assert abs(dlasso - lasso) <= 0.15 * lasso
    assert dlasso < ols
    assert lasso < ols


if __name__ == "__main__":
    pytest.main([__file__])
