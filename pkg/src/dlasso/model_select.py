"""
Degrees of freedom, selection criteria and grid tuning of (lambda, s).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sklearn.model_selection import KFold

from .baselines import BaselineKind, BaselineSpec, fit_baseline
from .config import FitConfig, Method, PenaltyParams, TuningGrid
from .data import Dataset
from .exceptions import CriterionError, DlassoError, ParameterError, TuningError
from .solver import FitResult, active_set, effective_df, fit

logger = logging.getLogger(__name__)

Fitter = Callable[[Dataset, PenaltyParams], FitResult]


class CriterionKind(Enum):
    """Model selection criteria."""
    AIC = "aic"
    BIC = "bic"
    GCV = "gcv"
    CV = "cv"


@dataclass(frozen=True)
class SelectionCriterion:
    """A criterion; ``k`` and ``seed`` only matter for cross-validation."""
    kind: CriterionKind
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind is CriterionKind.CV and self.k < 2:
            raise ParameterError(f"cross-validation needs at least 2 folds, got {self.k}")

    @classmethod
    def parse(cls, name: str, k: int = 10, seed: int = 0) -> "SelectionCriterion":
        """Build from ``"aic"``, ``"bic"``, ``"gcv"``, ``"cv"`` or ``"cv<k>"``."""
        key = name.strip().lower()
        if key.startswith("cv") and key[2:].isdigit():
            return cls(CriterionKind.CV, k=int(key[2:]), seed=seed)
        try:
            return cls(CriterionKind(key), k=k, seed=seed)
        except ValueError:
            raise ParameterError(f"Unknown criterion '{name}'")

    def __str__(self) -> str:
        if self.kind is CriterionKind.CV:
            return f"cv{self.k}"
        return self.kind.value


@dataclass
class TuneRow:
    """One evaluated grid point."""
    lam: float
    s: Optional[float]
    score: float
    df_count: int
    df_trace: float
    converged: bool
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "s": self.s,
            "score": self.score,
            "df_count": self.df_count,
            "df_trace": self.df_trace,
            "converged": self.converged,
            "error": self.error,
        }


@dataclass
class TuneResult:
    """Selected penalty, its fit on the full data, and the score table in grid order."""
    best: PenaltyParams
    best_fit: FitResult
    best_score: float
    criterion: SelectionCriterion
    method: str
    rows: List[TuneRow] = field(default_factory=list)

    @property
    def failures(self) -> List[TuneRow]:
        return [row for row in self.rows if not row.converged]


def make_fitter(method: Method = Method.DLASSO, fit_config: Optional[FitConfig] = None) -> Fitter:
    """Fitting function ``(data, params) -> FitResult`` for a method.

    Baselines read ``params.lam`` only.
    """
    method = Method(method)
    base = fit_config if fit_config is not None else FitConfig(PenaltyParams(s=1.0))
    if method is Method.DLASSO:
        return lambda data, params: fit(data, base.with_params(params))
    kind = BaselineKind(method.value)
    return lambda data, params: fit_baseline(data, BaselineSpec(kind, params.lam), base.report_zero_tol)


def degrees_of_freedom(
    data: Dataset,
    result: FitResult,
    params: Optional[PenaltyParams] = None,
    report_zero_tol: float = 1e-4,
) -> Tuple[int, float]:
    """(df_count, df_trace) of a fit.

    For dlasso fits df_trace is tr(X (X'X + Sigma(beta)/2)^-1 X'); baseline
    fits keep the value they were built with.
    """
    df_count = len(active_set(result.beta, report_zero_tol))
    params = params if params is not None else result.params
    if result.method == Method.DLASSO.value and params is not None:
        return df_count, effective_df(data, result.beta, params)
    return df_count, float(result.df_trace)


def _profile_log_rss(n: int, rss: float) -> float:
    ratio = rss / n
    if not ratio > 0:
        logger.warning("residual sum of squares is %g; log term floored", rss)
        ratio = np.finfo(float).tiny
    return n * math.log(ratio)


def information_score(kind: CriterionKind, n: int, rss: float, df_count: int, df_trace: float) -> float:
    """AIC, BIC or GCV from summary quantities.

    Raises
    ------
    CriterionError
        GCV with ``df_trace >= n``.
    """
    if kind is CriterionKind.AIC:
        return _profile_log_rss(n, rss) + 2.0 * df_count
    if kind is CriterionKind.BIC:
        return _profile_log_rss(n, rss) + math.log(n) * df_count
    if kind is CriterionKind.GCV:
        if df_trace >= n:
            raise CriterionError(f"GCV undefined: df_trace={df_trace:g} >= n={n}")
        return rss / (n * (1.0 - df_trace / n) ** 2)
    raise CriterionError(f"{kind.value} is not an information criterion")


def cv_folds(n: int, k: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(train, test) index pairs of a seeded shuffled k-fold split."""
    if not 2 <= k <= n:
        raise CriterionError(f"cross-validation folds must be between 2 and n={n}, got {k}")
    return list(KFold(n_splits=k, shuffle=True, random_state=seed).split(np.arange(n)))


def cv_score(data: Dataset, params: PenaltyParams, fitter: Fitter, k: int, seed: int) -> float:
    """Mean over folds of the held-out mean squared prediction error."""
    fold_errors = []
    for train_idx, test_idx in cv_folds(data.n, k, seed):
        result = fitter(data.subset(train_idx), params)
        resid = data.y[test_idx] - data.X[test_idx] @ result.beta
        fold_errors.append(float(np.mean(resid ** 2)))
    return float(np.mean(fold_errors))


def criterion_score(
    data: Dataset,
    result: FitResult,
    crit: SelectionCriterion,
    fitter: Optional[Fitter] = None,
    params: Optional[PenaltyParams] = None,
) -> float:
    """Score a fit under a criterion; lower is better.

    AIC and BIC use the active-set size, GCV the hat-matrix trace. CV refits
    on each fold with ``fitter`` (default: a dlasso fit with the result's
    penalty).
    """
    if crit.kind is CriterionKind.CV:
        params = params if params is not None else result.params
        if params is None:
            raise CriterionError("cross-validation needs the penalty the fit was computed with")
        return cv_score(data, params, fitter or make_fitter(Method.DLASSO), crit.k, crit.seed)
    rss = data.rss(result.beta)
    return information_score(crit.kind, data.n, rss, result.df_count, result.df_trace)


def _grid_points(grid: TuningGrid, method: Method) -> List[Tuple[PenaltyParams, Optional[float]]]:
    if method is Method.DLASSO:
        return [(params, params.s) for params in grid.points()]
    lambdas = [0.0] if method is Method.OLS else grid.lambdas
    # s does not enter the baselines; PenaltyParams still needs a valid one
    return [(PenaltyParams(s=1.0, lam=lam), None) for lam in lambdas]


def tune(
    data: Dataset,
    grid: TuningGrid,
    crit: SelectionCriterion,
    method: Method = Method.DLASSO,
    fit_config: Optional[FitConfig] = None,
) -> TuneResult:
    """Exhaustive grid search.

    Non-converged or failing grid points are kept in the table but never
    selected. The lowest score wins; exact ties go to the larger lambda and
    then the larger s.

    Raises
    ------
    TuningError
        No grid point produced a converged fit.
    """
    method = Method(method)
    fitter = make_fitter(method, fit_config)
    rows: List[TuneRow] = []
    best: Optional[Tuple[float, float, float]] = None
    best_point: Optional[Tuple[PenaltyParams, FitResult]] = None

    for params, s_label in _grid_points(grid, method):
        try:
            result = fitter(data, params)
        except DlassoError as exc:
            logger.warning("grid point lambda=%g s=%s failed: %s", params.lam, s_label, exc)
            rows.append(TuneRow(params.lam, s_label, float("nan"), -1, float("nan"), False, str(exc)))
            continue
        if not result.converged:
            logger.warning("grid point lambda=%g s=%s did not converge", params.lam, s_label)
            rows.append(TuneRow(params.lam, s_label, float("nan"), result.df_count, result.df_trace, False, "not converged"))
            continue
        try:
            score = criterion_score(data, result, crit, fitter=fitter, params=params)
        except DlassoError as exc:
            logger.warning("grid point lambda=%g s=%s could not be scored: %s", params.lam, s_label, exc)
            rows.append(TuneRow(params.lam, s_label, float("nan"), result.df_count, result.df_trace, False, str(exc)))
            continue

        rows.append(TuneRow(params.lam, s_label, score, result.df_count, result.df_trace, True))
        key = (score, -params.lam, -(s_label or 0.0))
        if best is None or key < best:
            best = key
            best_point = (params, result)

    if best_point is None:
        raise TuningError("no grid point produced a converged fit", failures=rows)

    params, result = best_point
    logger.info("selected lambda=%g s=%g by %s (score %.6g)", params.lam, params.s, crit, best[0])
    return TuneResult(
        best=params,
        best_fit=result,
        best_score=best[0],
        criterion=crit,
        method=method.value,
        rows=rows,
    )
