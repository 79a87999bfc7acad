"""
Simulation scenarios, their error metrics and the replicate pipeline.

Predictors are multivariate normal with mean zero and a scenario-specific
correlation matrix; the response is X beta + sigma e. The first ``n_train``
rows of a replicate form the training split and both splits are
standardized with training statistics.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import block_diag

from .baselines import fit_ols
from .config import FitConfig, Method, TuningGrid
from .data import Dataset
from .exceptions import DlassoError, ParameterError, ShapeError
from .model_select import SelectionCriterion, tune
from .preprocessing import Standardizer
from .solver import FitResult, active_set

logger = logging.getLogger(__name__)

FIXED_SHAPE = 0.01


class ScenarioId(Enum):
    """The three simulation designs."""
    STANDARD = 1
    SMALL_BETAS = 2
    CORRELATED_GROUPS = 3


class SimMethod(Enum):
    """Estimators compared in a simulation run."""
    DLASSO = "dlasso"
    DLASSO_FIXED_S = "dlasso.s"
    LASSO = "lasso"
    RIDGE = "ridge"
    OLS = "ols"


@dataclass
class ScenarioSpec:
    """Sizes and seed of a simulation run."""
    id: ScenarioId = ScenarioId.STANDARD
    n_total: int = 240
    n_train: int = 40
    seed: int = 0
    replicates: int = 50

    def __post_init__(self):
        self.id = ScenarioId(self.id)
        if not 0 < self.n_train < self.n_total:
            raise ParameterError(f"need 0 < n_train < n_total, got {self.n_train} and {self.n_total}")
        if self.replicates < 1:
            raise ParameterError(f"replicates must be at least 1, got {self.replicates}")

    @property
    def n_test(self) -> int:
        return self.n_total - self.n_train

    def replicate_seed(self, replicate: int) -> int:
        return self.seed + replicate


@dataclass
class ScenarioTruth:
    """True coefficients, predictor correlation and noise standard deviation."""
    beta: np.ndarray
    correlation: np.ndarray
    sigma: float

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        self.correlation = np.asarray(self.correlation, dtype=float)
        p = self.beta.shape[0]
        if self.correlation.shape != (p, p):
            raise ShapeError(f"correlation of shape {self.correlation.shape} does not match p={p}")
        if not np.allclose(self.correlation, self.correlation.T) or not np.allclose(np.diag(self.correlation), 1.0):
            raise ParameterError("correlation must be symmetric with unit diagonal")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ParameterError(f"sigma must be non-negative, got {self.sigma}")

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor of the correlation matrix."""
        return np.linalg.cholesky(self.correlation)


def ar_correlation(p: int, rho: float) -> np.ndarray:
    """rho ** |i - j|."""
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def exchangeable_block(size: int, rho: float) -> np.ndarray:
    """Constant off-diagonal correlation rho within one block."""
    return rho * np.ones((size, size)) + (1.0 - rho) * np.eye(size)


def scenario_truth(id: ScenarioId) -> ScenarioTruth:
    """Ground truth of a scenario."""
    id = ScenarioId(id)
    if id is ScenarioId.STANDARD:
        return ScenarioTruth(np.array([3.0, 1.5, 0, 0, 2.0, 0, 0, 0]), ar_correlation(8, 0.5), math.sqrt(3.0))
    if id is ScenarioId.SMALL_BETAS:
        return ScenarioTruth(np.full(8, 0.5), ar_correlation(8, 0.5), math.sqrt(3.0))
    beta = np.concatenate([np.arange(1.0, 6.0), np.full(5, 0.5), np.zeros(5)])
    correlation = block_diag(exchangeable_block(5, 0.9), exchangeable_block(5, 0.5), np.eye(5))
    return ScenarioTruth(beta, correlation, math.sqrt(15.0))


def sample_design(rng: np.random.Generator, truth: ScenarioTruth, n: int) -> np.ndarray:
    """n rows from N(0, correlation): standard normals times the transposed Cholesky factor."""
    Z = rng.standard_normal((n, truth.p))
    return Z @ truth.cholesky().T


def generate(spec: ScenarioSpec, truth: ScenarioTruth, seed: Optional[int] = None) -> Tuple[Dataset, Dataset]:
    """Draw one replicate and split it into standardized train and test datasets.

    Uses ``numpy.random.default_rng`` (PCG64) seeded with ``seed`` or
    ``spec.seed``: design first, then noise.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    X = sample_design(rng, truth, spec.n_total)
    y = X @ truth.beta + truth.sigma * rng.standard_normal(spec.n_total)

    names = [f"x{j + 1}" for j in range(truth.p)]
    scaler = Standardizer()
    X_train, y_train = scaler.fit_transform(X[: spec.n_train], y[: spec.n_train], names)
    X_test, y_test = scaler.transform(X[spec.n_train:], y[spec.n_train:])
    st = scaler.standardization
    return Dataset(X_train, y_train, names, st), Dataset(X_test, y_test, names, st)


def metrics(truth: ScenarioTruth, test: Dataset, beta_hat: np.ndarray) -> Tuple[float, float]:
    """(pred_mse, param_mse) of standardized-scale coefficients on a test split.

    pred_mse is the mean squared test residual; param_mse is
    (b - beta)' S_X (b - beta) with b mapped back to original units and S_X
    the true correlation matrix.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != (test.p,) or test.p != truth.p:
        raise ShapeError(f"beta_hat of shape {beta_hat.shape} does not match p={truth.p}")
    resid = test.y - test.X @ beta_hat
    pred_mse = float(np.mean(resid ** 2))
    coef, _ = test.standardization.coef_to_original(beta_hat)
    diff = coef - truth.beta
    param_mse = float(diff @ truth.correlation @ diff)
    return pred_mse, param_mse


@dataclass
class SimulationRow:
    """One (replicate, method) outcome."""
    replicate: int
    seed: int
    method: str
    pred_mse: float
    param_mse: float
    lam: Optional[float]
    s: Optional[float]
    df_count: int
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "replicate": self.replicate,
            "seed": self.seed,
            "method": self.method,
            "pred_mse": self.pred_mse,
            "param_mse": self.param_mse,
            "lambda": self.lam,
            "s": self.s,
            "df_count": self.df_count,
            "converged": self.converged,
        }


@dataclass
class SimulationPlan:
    """What to fit on every replicate and how to tune it."""
    methods: List[SimMethod] = field(default_factory=lambda: list(SimMethod))
    criterion: SelectionCriterion = field(default_factory=lambda: SelectionCriterion.parse("cv10"))
    lambdas: Optional[Sequence[float]] = None
    s_values: Optional[Sequence[float]] = None
    fit_config: Optional[FitConfig] = None

    def grid_for(self, method: SimMethod, n_train: int) -> TuningGrid:
        default = TuningGrid.default(n_train)
        lambdas = self.lambdas if self.lambdas is not None else default.lambdas
        if method is SimMethod.DLASSO_FIXED_S:
            return TuningGrid(lambdas, [FIXED_SHAPE])
        s_values = self.s_values if self.s_values is not None else default.s_values
        return TuningGrid(lambdas, s_values)


def fit_method(train: Dataset, method: SimMethod, plan: SimulationPlan) -> Tuple[FitResult, Optional[float], Optional[float]]:
    """Fit one method on a training split; returns the fit and the selected (lambda, s)."""
    if method is SimMethod.OLS:
        beta = fit_ols(train)
        zero_tol = plan.fit_config.report_zero_tol if plan.fit_config is not None else 1e-4
        active = active_set(beta, zero_tol)
        return FitResult(beta, active, 1, True, train.rss(beta), len(active), float(train.p), method="ols"), None, None

    tuned_method = Method.DLASSO if method in (SimMethod.DLASSO, SimMethod.DLASSO_FIXED_S) else Method(method.value)
    grid = plan.grid_for(method, train.n)
    result = tune(train, grid, plan.criterion, method=tuned_method, fit_config=plan.fit_config)
    s = result.best.s if tuned_method is Method.DLASSO else None
    return result.best_fit, result.best.lam, s


def run_replicate(spec: ScenarioSpec, truth: ScenarioTruth, replicate: int, plan: SimulationPlan) -> List[SimulationRow]:
    """Generate one replicate and evaluate every planned method on it."""
    seed = spec.replicate_seed(replicate)
    train, test = generate(spec, truth, seed=seed)
    rows = []
    for method in plan.methods:
        try:
            result, lam, s = fit_method(train, method, plan)
        except DlassoError as exc:
            logger.warning("replicate %d, method %s failed: %s", replicate, method.value, exc)
            rows.append(SimulationRow(replicate, seed, method.value, float("nan"), float("nan"), None, None, -1, False))
            continue
        pred_mse, param_mse = metrics(truth, test, result.beta)
        rows.append(SimulationRow(replicate, seed, method.value, pred_mse, param_mse, lam, s, result.df_count, result.converged))
    return rows


def run_simulation(spec: ScenarioSpec, plan: Optional[SimulationPlan] = None) -> List[SimulationRow]:
    """All replicates of a scenario, rows ordered by replicate then method."""
    plan = plan or SimulationPlan()
    truth = scenario_truth(spec.id)
    rows: List[SimulationRow] = []
    for replicate in range(spec.replicates):
        logger.debug("scenario %d replicate %d", spec.id.value, replicate)
        rows.extend(run_replicate(spec, truth, replicate, plan))
    return rows


def rows_to_frame(rows: Sequence[SimulationRow]) -> pd.DataFrame:
    columns = ["replicate", "seed", "method", "pred_mse", "param_mse", "lambda", "s", "df_count", "converged"]
    return pd.DataFrame([row.to_dict() for row in rows], columns=columns)


def summarize(rows: Sequence[SimulationRow]) -> pd.DataFrame:
    """Median errors and converged counts per method, in first-seen method order."""
    frame = rows_to_frame(rows)
    order = list(dict.fromkeys(frame["method"]))
    summary = frame.groupby("method", sort=False).agg(
        median_pred_mse=("pred_mse", "median"),
        median_param_mse=("param_mse", "median"),
        converged=("converged", "sum"),
        replicates=("replicate", "count"),
    )
    return summary.loc[order].reset_index()
