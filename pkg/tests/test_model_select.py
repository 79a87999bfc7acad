"""
Tests for selection criteria and grid tuning.
"""

import logging
import math
import os
from pathlib import Path

import numpy as np
import pytest
from sklearn.model_selection import KFold

from src.dlasso.baselines import fit_ridge
from src.dlasso.config import FitConfig, Method, PenaltyParams, TuningGrid
from src.dlasso.data import Dataset, load_dataset
from src.dlasso.exceptions import CriterionError, ParameterError, TuningError
from src.dlasso.model_select import (
    CriterionKind,
    SelectionCriterion,
    criterion_score,
    cv_folds,
    cv_score,
    degrees_of_freedom,
    information_score,
    make_fitter,
    tune,
)
from src.dlasso.solver import fit


@pytest.fixture
def data():
    rng = np.random.default_rng(21)
    X = rng.standard_normal((60, 5))
    y = X @ np.array([1.5, 0.0, -2.0, 0.0, 0.0]) + rng.standard_normal(60)
    return Dataset.from_arrays(X, y)


def test_parse_criterion():
    """Test criterion names including the cv<k> shorthand."""
    assert SelectionCriterion.parse("BIC").kind is CriterionKind.BIC
    cv5 = SelectionCriterion.parse("cv5", seed=3)
    assert (cv5.kind, cv5.k, cv5.seed) == (CriterionKind.CV, 5, 3)
    assert str(cv5) == "cv5"
    assert str(SelectionCriterion.parse("cv")) == "cv10"
    assert str(SelectionCriterion.parse("gcv")) == "gcv"
    with pytest.raises(ParameterError):
        SelectionCriterion.parse("mallows")
    with pytest.raises(ParameterError):
        SelectionCriterion(CriterionKind.CV, k=1)


def test_bic_difference():
    """Test equal RSS with df 5 vs 8 at n = 97 differs by 3 log(97)."""
    low = information_score(CriterionKind.BIC, 97, 42.0, 5, 5.0)
    high = information_score(CriterionKind.BIC, 97, 42.0, 8, 8.0)
    assert high - low == pytest.approx(3.0 * math.log(97.0), rel=1e-12)


def test_aic_formula():
    """Test AIC = n log(RSS / n) + 2 df."""
    assert information_score(CriterionKind.AIC, 50, 25.0, 3, 2.5) == pytest.approx(50 * math.log(0.5) + 6.0)


def test_gcv_formula_and_error():
    """Test GCV and its undefined case df_trace >= n."""
    assert information_score(CriterionKind.GCV, 20, 10.0, 0, 4.0) == pytest.approx(10.0 / (20 * 0.8 ** 2))
    with pytest.raises(CriterionError):
        information_score(CriterionKind.GCV, 20, 10.0, 20, 20.0)


def test_zero_rss_is_floored(caplog):
    """Test a saturated fit gives a finite, very negative score and a warning."""
    with caplog.at_level(logging.WARNING):
        score = information_score(CriterionKind.AIC, 10, 0.0, 2, 2.0)
    assert math.isfinite(score)
    assert score < -1000.0
    assert "floored" in caplog.text


def test_cv_folds_partition():
    """Test the folds partition the rows and are reproducible."""
    folds = cv_folds(23, 5, seed=4)
    assert len(folds) == 5
    held_out = np.sort(np.concatenate([test for _, test in folds]))
    np.testing.assert_array_equal(held_out, np.arange(23))
    again = cv_folds(23, 5, seed=4)
    for (a_train, a_test), (b_train, b_test) in zip(folds, again):
        np.testing.assert_array_equal(a_test, b_test)
        np.testing.assert_array_equal(a_train, b_train)


@pytest.mark.parametrize("k", [1, 61])
def test_cv_folds_bounds(data, k):
    """Test fold counts outside [2, n] raise CriterionError."""
    with pytest.raises(CriterionError):
        cv_folds(data.n, k, seed=0)


def test_cv_score_oracle(data):
    """Test the CV score against an explicit fold loop."""
    params = PenaltyParams(s=1.0, lam=3.0)
    score = cv_score(data, params, make_fitter(Method.RIDGE), k=6, seed=9)
    errors = []
    for train, test in KFold(n_splits=6, shuffle=True, random_state=9).split(data.X):
        beta = fit_ridge(data.subset(train), 3.0)
        errors.append(np.mean((data.y[test] - data.X[test] @ beta) ** 2))
    assert score == pytest.approx(float(np.mean(errors)), rel=1e-12)


def test_criterion_score_uses_df_count_for_bic(data):
    """Test BIC on a fit uses its active-set size."""
    result = fit(data, FitConfig(PenaltyParams(s=0.01, lam=30.0)))
    crit = SelectionCriterion(CriterionKind.BIC)
    expected = data.n * math.log(data.rss(result.beta) / data.n) + math.log(data.n) * result.df_count
    assert criterion_score(data, result, crit) == pytest.approx(expected, rel=1e-12)


def test_criterion_score_cv_needs_params(data):
    """Test CV scoring of a fit without penalty information is refused."""
    result = make_fitter(Method.OLS)(data, PenaltyParams(s=1.0))
    with pytest.raises(CriterionError):
        criterion_score(data, result, SelectionCriterion(CriterionKind.CV, k=5))


def test_degrees_of_freedom(data):
    """Test df_count and df_trace of a dlasso fit."""
    params = PenaltyParams(s=0.5, lam=5.0)
    result = fit(data, FitConfig(params))
    df_count, df_trace = degrees_of_freedom(data, result)
    assert df_count == result.df_count
    assert df_trace == pytest.approx(result.df_trace, rel=1e-12)
    ols = make_fitter(Method.OLS)(data, PenaltyParams(s=1.0))
    assert degrees_of_freedom(data, ols) == (data.p, pytest.approx(data.p))


def test_tune_table_size_and_order(data):
    """Test every grid point appears once, lambdas outer and shapes inner."""
    grid = TuningGrid([0.1, 1.0, 10.0], [0.01, 0.5])
    tuned = tune(data, grid, SelectionCriterion(CriterionKind.BIC))
    assert len(tuned.rows) == len(grid) == 6
    assert [(row.lam, row.s) for row in tuned.rows] == [(p.lam, p.s) for p in grid.points()]
    scores = [row.score for row in tuned.rows if row.converged]
    assert tuned.best_score == min(scores)
    assert tuned.method == "dlasso"


def test_tune_single_point(data):
    """Test a one-point grid selects that point."""
    tuned = tune(data, TuningGrid([2.0], [0.3]), SelectionCriterion(CriterionKind.GCV))
    assert (tuned.best.lam, tuned.best.s) == (2.0, 0.3)
    assert len(tuned.rows) == 1
    assert tuned.best_fit.params == PenaltyParams(s=0.3, lam=2.0)


def test_tune_ties_prefer_larger_lambda(data):
    """Test exact score ties go to the larger lambda."""
    lam_max = 2.0 * float(np.max(np.abs(data.xty)))
    grid = TuningGrid([lam_max * 2, lam_max * 4, lam_max * 8], [1.0])
    tuned = tune(data, grid, SelectionCriterion(CriterionKind.BIC), method=Method.LASSO)
    assert len({row.score for row in tuned.rows}) == 1
    assert tuned.best.lam == lam_max * 8
    assert all(row.s is None for row in tuned.rows)


def test_tune_ols_single_point(data):
    """Test OLS tuning evaluates lambda = 0 only."""
    tuned = tune(data, TuningGrid([1.0, 5.0], [0.5]), SelectionCriterion(CriterionKind.AIC), method=Method.OLS)
    assert [row.lam for row in tuned.rows] == [0.0]
    assert tuned.best_fit.method == "ols"


def test_tune_all_points_fail():
    """Test TuningError when no grid point can be fitted."""
    rng = np.random.default_rng(5)
    wide = Dataset(rng.standard_normal((4, 6)), rng.standard_normal(4))
    with pytest.raises(TuningError) as excinfo:
        tune(wide, TuningGrid([0.0], [0.5, 1.0]), SelectionCriterion(CriterionKind.BIC))
    assert len(excinfo.value.failures) == 2
    assert all(row.error for row in excinfo.value.failures)
    assert "first:" in str(excinfo.value)


def test_tune_keeps_failed_rows(data):
    """Test non-converged points stay in the table without being selected."""
    cfg = FitConfig(PenaltyParams(s=1.0), max_iter=1)
    tuned = tune(data, TuningGrid([0.0, 50.0], [0.01]), SelectionCriterion(CriterionKind.BIC), fit_config=cfg)
    assert len(tuned.rows) == 2
    assert tuned.best.lam == 0.0
    assert any(not row.converged for row in tuned.rows)
    assert tuned.failures == [row for row in tuned.rows if not row.converged]
    assert [row.to_dict()["error"] for row in tuned.failures] == ["not converged"]
    assert tuned.rows[0].to_dict()["error"] is None


@pytest.mark.slow
def test_pure_noise_bic_selects_empty_model():
    """Test BIC picks a fit with no active coefficients on pure-noise data in >= 90% of seeds."""
    grid = TuningGrid(list(np.logspace(0, 4, 9)), [0.001])
    crit = SelectionCriterion(CriterionKind.BIC)
    empty = 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        noise = Dataset.from_arrays(rng.standard_normal((400, 4)), rng.standard_normal(400))
        tuned = tune(noise, grid, crit, fit_config=FitConfig(PenaltyParams(s=0.001), max_iter=2000))
        empty += tuned.best_fit.df_count == 0
    assert empty >= 45


PROSTATE_PATH = Path(os.environ.get("DLASSO_PROSTATE_CSV", "data/prostate.csv"))
needs_prostate = pytest.mark.skipif(not PROSTATE_PATH.exists(), reason="prostate data not available")


@pytest.fixture(scope="module")
def prostate():
    return load_dataset(PROSTATE_PATH, "lpsa")


def bic_tuned(data, s):
    grid = TuningGrid(TuningGrid.default(data.n).lambdas, [s])
    return tune(data, grid, SelectionCriterion(CriterionKind.BIC))


@needs_prostate
def test_prostate_bic_selects_five_variables(prostate):
    """Test BIC-tuned dlasso at s = 0.001 keeps lcavol, lweight, lbph, pgg45 and svi."""
    tuned = bic_tuned(prostate, 0.001)
    active = {prostate.feature_names[i] for i in tuned.best_fit.active_set}
    assert active == {"lcavol", "lweight", "lbph", "pgg45", "svi"}
    assert tuned.best_fit.df_count == 5


@needs_prostate
@pytest.mark.parametrize("s", [1.0, 100.0])
def test_prostate_ridge_like_shapes_keep_all(prostate, s):
    """Test large shapes keep all eight predictors."""
    assert bic_tuned(prostate, s).best_fit.df_count == 8


@needs_prostate
def test_prostate_bic_ordering(prostate):
    """Test the lasso-like shape reaches a lower BIC than s = 1, and OLS uses all eight predictors."""
    assert bic_tuned(prostate, 0.001).best_score < bic_tuned(prostate, 1.0).best_score
    ols = make_fitter(Method.OLS)(prostate, PenaltyParams(s=1.0, lam=0.0))
    assert ols.df_count == 8



if __name__ == "__main__":
    pytest.main([__file__])
