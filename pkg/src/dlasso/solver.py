"""
Penalized least squares with the dlasso penalty.

Minimizes RSS(beta) + lam * sum_j p(beta_j, s) by iterated ridge solves. Each
step replaces the penalty with its quadratic surrogate around the previous
iterate,

    p(b) ~ p(b0) + grad(b0) / (2 b0) * (b^2 - b0^2),

so the update is (2 X'X + Sigma(b0)) b = 2 X'y with
Sigma_jj = lam * grad(b0_j) / b0_j. Fixed points of the update are exactly
the stationary points of the penalized criterion.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .config import FitConfig, InitKind, PenaltyParams
from .data import Dataset
from .exceptions import ShapeError, SingularSystemError
from .penalty import DlassoPenalty
from .special_fn import SQRT_PI

logger = logging.getLogger(__name__)

CERTIFICATE_FACTOR = 10.0
OBJECTIVE_SLACK = 1e-12


@dataclass
class FitResult:
    """Outcome of a single fit.

    Attributes
    ----------
    beta : ndarray of shape (p,)
        Coefficients on the dataset's working scale.
    active_set : list of int
        Indices with ``|beta_i| > report_zero_tol``.
    iterations : int
        Number of updates performed.
    converged : bool
        Whether the stopping rule was met. Non-convergence is reported here,
        never raised.
    objective : float
        Criterion value at ``beta`` under the method's own penalty.
    df_count : int
        Size of the active set.
    df_trace : float
        Trace of the hat matrix of the final ridge system.
    params : PenaltyParams, optional
        Penalty the fit was computed with.
    method : str
        ``"dlasso"``, ``"ols"``, ``"ridge"`` or ``"lasso"``.
    stationarity : float
        Infinity norm of the gradient of the criterion at ``beta`` (NaN for
        the non-differentiable lasso criterion).
    """
    beta: np.ndarray
    active_set: List[int]
    iterations: int
    converged: bool
    objective: float
    df_count: int
    df_trace: float
    params: Optional[PenaltyParams] = None
    method: str = "dlasso"
    stationarity: float = float("nan")
    history: List[float] = field(default_factory=list)

    def coefficients(self, feature_names: List[str]) -> Dict[str, float]:
        """Coefficients keyed by feature name."""
        if len(feature_names) != self.beta.shape[0]:
            raise ShapeError(f"{len(feature_names)} names for {self.beta.shape[0]} coefficients")
        return {name: float(b) for name, b in zip(feature_names, self.beta)}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "method": self.method,
            "beta": self.beta.tolist(),
            "active_set": list(self.active_set),
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
            "df_count": self.df_count,
            "df_trace": self.df_trace,
            "params": self.params.to_dict() if self.params is not None else None,
            "stationarity": self.stationarity,
        }


def _check_beta(data: Dataset, beta: np.ndarray) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise ShapeError(f"beta of shape {beta.shape} does not match p={data.p}")
    return beta


def objective(data: Dataset, beta: np.ndarray, params: PenaltyParams, fast: bool = False) -> float:
    """RSS(beta) + lam * sum_j p(beta_j, s)."""
    beta = _check_beta(data, beta)
    rss = data.rss(beta)
    if params.lam == 0.0:
        return rss
    return rss + params.lam * DlassoPenalty(params.s, fast=fast).total(beta)


def sigma_weights(beta_prev: np.ndarray, params: PenaltyParams, zero_ratio_eps: float = 1e-8, fast: bool = False) -> np.ndarray:
    """Diagonal of Sigma: lam * grad(b) / b, with the limit lam * 4 / (s sqrt(pi)) near zero."""
    beta_prev = np.asarray(beta_prev, dtype=float)
    if params.lam == 0.0:
        return np.zeros_like(beta_prev)
    ratio = DlassoPenalty(params.s, fast=fast).grad_ratio(beta_prev, eps=zero_ratio_eps)
    return params.lam * np.atleast_1d(np.asarray(ratio, dtype=float))


def sigma_diag(beta_prev: np.ndarray, params: PenaltyParams, zero_ratio_eps: float = 1e-8) -> np.ndarray:
    """Sigma(beta_prev, lam, s) as a p x p diagonal matrix."""
    return np.diag(sigma_weights(beta_prev, params, zero_ratio_eps))


def near_zero_weight(params: PenaltyParams) -> float:
    """Sigma entry of a coefficient at zero."""
    return params.lam * 4.0 / (params.s * SQRT_PI)


def quadratic_surrogate(beta: np.ndarray, beta_prev: np.ndarray, params: PenaltyParams, zero_ratio_eps: float = 1e-8) -> np.ndarray:
    """Per-coordinate quadratic surrogate of lam * p around ``beta_prev``.

    Touches lam * p at ``beta_prev`` with the same slope; minimizing RSS plus
    its sum is one ridge update.
    """
    beta = np.asarray(beta, dtype=float)
    beta_prev = np.asarray(beta_prev, dtype=float)
    penalty = DlassoPenalty(params.s)
    base = params.lam * np.asarray(penalty.value(beta_prev))
    weights = sigma_weights(beta_prev, params, zero_ratio_eps)
    return base + 0.5 * weights * (beta ** 2 - beta_prev ** 2)


def stationarity_residual(data: Dataset, beta: np.ndarray, params: PenaltyParams, fast: bool = False) -> np.ndarray:
    """Gradient of the criterion: -2 X'(y - X beta) + lam * grad(beta)."""
    beta = _check_beta(data, beta)
    grad = -2.0 * (data.xty - data.gram @ beta)
    if params.lam > 0.0:
        grad = grad + params.lam * np.atleast_1d(np.asarray(DlassoPenalty(params.s, fast=fast).grad(beta)))
    return grad


def certificate_bound(data: Dataset, tol: float) -> float:
    """Largest stationarity residual accepted at convergence."""
    return CERTIFICATE_FACTOR * tol * (1.0 + float(np.max(np.abs(data.xty))))


def solve_spd(matrix: np.ndarray, rhs: np.ndarray, iteration: Optional[int] = None) -> np.ndarray:
    """Solve a symmetric positive definite system by Cholesky factorization."""
    try:
        factor = cho_factor(matrix, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystemError(f"system is not positive definite ({exc})", iteration=iteration)
    solution = cho_solve(factor, rhs)
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError("system solve produced non-finite values", iteration=iteration)
    return solution


def check_full_rank(data: Dataset, iteration: int) -> None:
    if data.p > data.n or np.linalg.matrix_rank(data.X) < data.p:
        raise SingularSystemError(
            f"X'X is singular (rank {np.linalg.matrix_rank(data.X)} < p={data.p}) and lambda is zero",
            iteration=iteration,
        )


def hat_trace(data: Dataset, weights: np.ndarray) -> float:
    """tr(X (X'X + diag(weights))^-1 X')."""
    weights = np.asarray(weights, dtype=float)
    if not np.any(weights > 0):
        check_full_rank(data, iteration=0)
    A = data.gram + np.diag(weights)
    inv_gram = solve_spd(A, data.gram)
    return float(np.clip(np.trace(inv_gram), 0.0, data.p))


def effective_df(data: Dataset, beta: np.ndarray, params: PenaltyParams, zero_ratio_eps: float = 1e-8, fast: bool = False) -> float:
    """df_trace of the final dlasso ridge system, tr(X (X'X + Sigma/2)^-1 X')."""
    beta = _check_beta(data, beta)
    return hat_trace(data, 0.5 * sigma_weights(beta, params, zero_ratio_eps, fast=fast))


def active_set(beta: np.ndarray, zero_tol: float) -> List[int]:
    """Indices of coefficients larger than ``zero_tol`` in magnitude."""
    return [int(i) for i in np.flatnonzero(np.abs(np.asarray(beta)) > zero_tol)]


def _initial_beta(data: Dataset, config: FitConfig) -> np.ndarray:
    if config.init is InitKind.ZEROS:
        return np.zeros(data.p)
    if config.init is InitKind.SUPPLIED:
        return _check_beta(data, config.beta0).copy()
    lam = config.params.lam
    if lam == 0.0:
        check_full_rank(data, iteration=0)
    return solve_spd(data.gram + lam * np.eye(data.p), data.xty, iteration=0)


def fit(data: Dataset, config: FitConfig) -> FitResult:
    """Fit the dlasso criterion by iterated ridge solves.

    Each update is safeguarded: an update that increases the criterion is
    halved toward the previous iterate up to ``config.max_halvings`` times,
    after which the fit stops with ``converged=False``. The fit converges
    when the update is smaller than ``tol`` in the infinity norm and the
    stationarity residual is within ``certificate_bound``.

    Raises
    ------
    SingularSystemError
        The ridge system of some iteration could not be factorized, which
        can only happen for ``lam == 0`` with a rank-deficient design.
    """
    params = config.params
    fast = config.fast_erf
    if params.lam == 0.0:
        check_full_rank(data, iteration=1)

    beta = _initial_beta(data, config)
    current = objective(data, beta, params, fast=fast)
    history = [current]
    bound = certificate_bound(data, config.tol)
    converged = False
    iteration = 0
    residual = float(np.max(np.abs(stationarity_residual(data, beta, params, fast=fast))))

    for iteration in range(1, config.max_iter + 1):
        weights = sigma_weights(beta, params, config.zero_ratio_eps, fast=fast)
        proposal = solve_spd(2.0 * data.gram + np.diag(weights), 2.0 * data.xty, iteration=iteration)

        step = proposal - beta
        candidate = proposal
        value = objective(data, candidate, params, fast=fast)
        halvings = 0
        while value > current + OBJECTIVE_SLACK * max(1.0, abs(current)) and halvings < config.max_halvings:
            step = 0.5 * step
            candidate = beta + step
            value = objective(data, candidate, params, fast=fast)
            halvings += 1

        if value > current + OBJECTIVE_SLACK * max(1.0, abs(current)):
            logger.warning(
                "step halving exhausted after %d halvings at iteration %d (lambda=%g, s=%g)",
                halvings, iteration, params.lam, params.s,
            )
            break

        change = float(np.max(np.abs(candidate - beta)))
        beta = candidate
        current = value
        history.append(current)
        residual = float(np.max(np.abs(stationarity_residual(data, beta, params, fast=fast))))
        logger.debug(
            "iteration %d: objective=%.12g change=%.3e residual=%.3e halvings=%d",
            iteration, current, change, residual, halvings,
        )
        if change < config.tol and residual <= bound:
            converged = True
            break

    if not converged:
        logger.warning(
            "dlasso fit did not converge after %d iterations (lambda=%g, s=%g, residual=%.3e)",
            iteration, params.lam, params.s, residual,
        )

    active = active_set(beta, config.report_zero_tol)
    return FitResult(
        beta=beta,
        active_set=active,
        iterations=iteration,
        converged=converged,
        objective=current,
        df_count=len(active),
        df_trace=effective_df(data, beta, params, config.zero_ratio_eps, fast=fast),
        params=params,
        method="dlasso",
        stationarity=residual,
        history=history,
    )


def compare_starts(data: Dataset, config: FitConfig, atol: float = 1e-6) -> Tuple[FitResult, FitResult]:
    """Fit from the ridge warm start and from zeros and compare the objectives.

    Both starts reach the same minimum when the criterion is convex. In the
    non-convex regime they may settle in different basins, which is logged.
    """
    warm = fit(data, replace(config, init=InitKind.RIDGE_WARM_START))
    cold = fit(data, replace(config, init=InitKind.ZEROS))
    gap = abs(warm.objective - cold.objective)
    if gap > atol * max(1.0, abs(warm.objective)):
        logger.warning(
            "warm start and zero start disagree by %.3e (lambda=%g, s=%g)",
            gap, config.params.lam, config.params.s,
        )
    return warm, cold


def fit_gradient_descent(
    data: Dataset,
    params: PenaltyParams,
    beta0: Optional[np.ndarray] = None,
    tol: float = 1e-8,
    max_iter: int = 200000,
    report_zero_tol: float = 1e-4,
) -> FitResult:
    """Plain gradient descent on the dlasso criterion.

    Slow but free of the reweighting machinery; used to cross-check ``fit``.
    The step is 1/L with L = 2 ||X'X||_2 + lam * 4 / (s sqrt(pi)), a bound on
    the curvature of the criterion.
    """
    beta = np.zeros(data.p) if beta0 is None else _check_beta(data, beta0).copy()
    lipschitz = 2.0 * float(np.linalg.norm(data.gram, 2)) + near_zero_weight(params)
    step = 1.0 / lipschitz
    bound = certificate_bound(data, tol)

    converged = False
    iteration = 0
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        grad = stationarity_residual(data, beta, params)
        residual = float(np.max(np.abs(grad)))
        if residual <= bound:
            converged = True
            break
        beta = beta - step * grad

    if not converged:
        logger.warning("gradient descent stopped after %d iterations (residual=%.3e)", iteration, residual)
    active = active_set(beta, report_zero_tol)
    return FitResult(
        beta=beta,
        active_set=active,
        iterations=iteration,
        converged=converged,
        objective=objective(data, beta, params),
        df_count=len(active),
        df_trace=effective_df(data, beta, params),
        params=params,
        method="dlasso",
        stationarity=residual,
    )
