"""
One-dimensional dlasso estimator for an identity design.

For y = beta + noise the penalized criterion separates into scalar problems
(y - b)^2 + lam * p(b, s). The penalty is not convex, so the stationarity
equation can have several roots; the global minimizer is returned.
"""

import math
from dataclasses import dataclass
from typing import List

import numpy as np

from .config import PenaltyParams
from .exceptions import DomainError
from .penalty import DlassoPenalty

BISECTION_TOL = 1e-12
GRID_DIVISOR = 100.0
# Beyond 8 s from the origin erf(b/s) is 1 in double precision and the
# stationarity equation is linear and increasing in b.
FLAT_EDGE = 8.0
COARSE_POINTS = 1000
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class ThresholdQuery:
    """Observation ``y`` and the penalty it is shrunk with."""
    y: float
    params: PenaltyParams

    def __post_init__(self):
        if not math.isfinite(float(self.y)):
            raise DomainError(f"y must be finite, got {self.y}")


def scalar_objective(b: np.ndarray, y: float, params: PenaltyParams) -> np.ndarray:
    """(y - b)^2 + lam * p(b, s) for an array of candidates ``b``."""
    b = np.asarray(b, dtype=float)
    penalty = DlassoPenalty(params.s)
    return (y - b) ** 2 + params.lam * np.asarray(penalty.value(b))


def _stationarity(b: np.ndarray, y: float, lam: float, penalty: DlassoPenalty) -> np.ndarray:
    return lam * np.asarray(penalty.grad(b)) - 2.0 * (y - b)


def _bisect(lo: np.ndarray, hi: np.ndarray, y: float, lam: float, penalty: DlassoPenalty) -> np.ndarray:
    """Vectorized bisection on brackets where the stationarity function changes sign."""
    f_lo = _stationarity(lo, y, lam, penalty)
    for _ in range(MAX_BISECTIONS):
        if np.all(hi - lo <= BISECTION_TOL):
            break
        mid = 0.5 * (lo + hi)
        f_mid = _stationarity(mid, y, lam, penalty)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def stationary_points(y: float, params: PenaltyParams) -> np.ndarray:
    """All roots of the stationarity equation; they lie between 0 and y.

    Up to ``FLAT_EDGE * s`` from the origin the interval is scanned at
    resolution s / 100. Beyond it the equation has at most one root,
    which a coarse scan brackets. Every sign change is polished by bisection
    to 1e-12.
    """
    penalty = DlassoPenalty(params.s)
    ay = abs(float(y))
    edge = min(ay, FLAT_EDGE * params.s)
    step = params.s / GRID_DIVISOR
    grid = np.linspace(0.0, edge, int(math.ceil(edge / step)) + 1)
    if ay > edge:
        grid = np.concatenate([grid, np.linspace(edge, ay, COARSE_POINTS)[1:]])
    if y < 0:
        grid = -grid[::-1]
    values = _stationarity(grid, y, params.lam, penalty)

    exact = grid[values == 0.0]
    change = np.sign(values[:-1]) * np.sign(values[1:]) < 0
    if not change.any():
        return exact
    roots = _bisect(grid[:-1][change], grid[1:][change], y, params.lam, penalty)
    return np.concatenate([exact, roots])


def scalar_estimate(q: ThresholdQuery) -> float:
    """Global minimizer of (y - b)^2 + lam * p(b, s) over b.

    The problem is solved for |y| and mapped back with the sign of y, so the
    rule is exactly odd, shares the sign of y and never exceeds |y|.
    """
    y = float(q.y)
    if y == 0.0 or q.params.lam == 0.0:
        return y
    ay = abs(y)
    candidates: List[np.ndarray] = [np.array([0.0, ay]), stationary_points(ay, q.params)]
    pool = np.concatenate(candidates)
    pool = pool[(pool >= 0.0) & (pool <= ay)]
    values = scalar_objective(pool, ay, q.params)
    best = float(pool[int(np.argmin(values))])
    return math.copysign(best, y) if best != 0.0 else 0.0


def threshold_curve(ys: np.ndarray, params: PenaltyParams) -> np.ndarray:
    """Estimates for a sequence of observations (one thresholding curve)."""
    return np.array([scalar_estimate(ThresholdQuery(float(y), params)) for y in np.asarray(ys, dtype=float)])
