"""
JSON documents written by the command line.
"""

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from .data import Dataset
from .model_select import TuneResult
from .solver import FitResult


class FitMethod(str, Enum):
    DLASSO = "dlasso"
    OLS = "ols"
    RIDGE = "ridge"
    LASSO = "lasso"


class PenaltyModel(BaseModel):
    s: Optional[float] = None
    lam: Optional[float] = Field(default=None, alias="lambda")

    model_config = {"populate_by_name": True}


class FitReport(BaseModel):
    method: FitMethod
    params: PenaltyModel
    n: int
    p: int
    coefficients: Dict[str, float]
    coefficients_original: Dict[str, float]
    intercept_original: float
    active_set: List[str]
    df_count: int
    df_trace: float
    objective: float
    converged: bool
    iterations: int
    stationarity: Optional[float] = None
    criterion: Optional[str] = None
    score: Optional[float] = None


class ScoreRow(BaseModel):
    lam: float = Field(alias="lambda")
    s: Optional[float] = None
    score: Optional[float] = None
    df_count: int
    df_trace: Optional[float] = None
    converged: bool
    error: Optional[str] = None

    model_config = {"populate_by_name": True}


class TuneReport(BaseModel):
    method: FitMethod
    criterion: str
    best: PenaltyModel
    best_score: float
    best_fit: FitReport
    grid_size: int
    failed_points: int
    table: List[ScoreRow]


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def build_fit_report(
    data: Dataset,
    result: FitResult,
    lam: Optional[float] = None,
    s: Optional[float] = None,
    criterion: Optional[str] = None,
    score: Optional[float] = None,
) -> FitReport:
    """FitReport with coefficients on the standardized and the original scale."""
    names = list(data.feature_names)
    coef, intercept = data.standardization.coef_to_original(result.beta)
    if result.params is not None:
        lam = result.params.lam if lam is None else lam
        s = result.params.s if s is None else s
    return FitReport(
        method=FitMethod(result.method),
        params=PenaltyModel(s=s, lam=lam),
        n=data.n,
        p=data.p,
        coefficients=result.coefficients(names),
        coefficients_original={name: float(c) for name, c in zip(names, coef)},
        intercept_original=intercept,
        active_set=[names[i] for i in result.active_set],
        df_count=result.df_count,
        df_trace=result.df_trace,
        objective=result.objective,
        converged=result.converged,
        iterations=result.iterations,
        stationarity=_finite_or_none(result.stationarity),
        criterion=criterion,
        score=_finite_or_none(score),
    )


def build_tune_report(data: Dataset, tuned: TuneResult) -> TuneReport:
    """TuneReport for a finished grid search."""
    shape = tuned.best.s if tuned.method == FitMethod.DLASSO.value else None
    best_fit = build_fit_report(
        data, tuned.best_fit, lam=tuned.best.lam, s=shape,
        criterion=str(tuned.criterion), score=tuned.best_score,
    )
    table = [
        ScoreRow(
            lam=row.lam,
            s=row.s,
            score=_finite_or_none(row.score),
            df_count=row.df_count,
            df_trace=_finite_or_none(row.df_trace),
            converged=row.converged,
            error=row.error,
        )
        for row in tuned.rows
    ]
    return TuneReport(
        method=FitMethod(tuned.method),
        criterion=str(tuned.criterion),
        best=PenaltyModel(s=shape, lam=tuned.best.lam),
        best_score=tuned.best_score,
        best_fit=best_fit,
        grid_size=len(tuned.rows),
        failed_points=len(tuned.failures),
        table=table,
    )


def dump_report(report: BaseModel) -> str:
    """Serialized document with field aliases (``lambda``) and a trailing newline."""
    return report.model_dump_json(indent=2, by_alias=True) + "\n"
