"""
Accuracy and speed tables for the erf kernels and the smooth |x| penalties.
"""

import logging
import time
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import special, stats

from .penalty import LOG_2, SmoothAbsKind, abs_gap_bound, smooth_abs, sqrt_lower_bound
from .special_fn import ErfKernel, SQRT_PI, cdf_piecewise_sine, get_erf_kernel

logger = logging.getLogger(__name__)

ERF_GRID = (-6.0, 6.0, 1201)
PENALTY_GRID = (-3.0, 3.0, 601)
DEFAULT_SHAPES = (0.01, 0.1, 0.5, 1.0)

# Range each kernel is meant for; the asymptotic complement diverges near 0.
KERNEL_DOMAINS: Dict[ErfKernel, Tuple[float, float]] = {
    ErfKernel.REFERENCE: (0.0, 6.0),
    ErfKernel.TAYLOR_SMALL: (0.0, 3.0),
    ErfKernel.TAYLOR_SCALED: (0.0, 6.0),
    ErfKernel.ASYMPTOTIC_COMPLEMENT: (2.0, 6.0),
    ErfKernel.TANH_FAST: (0.0, 6.0),
    ErfKernel.PIECEWISE_SINE_CDF: (0.0, 6.0),
}


def _kernel_grid(kind: ErfKernel, grid: np.ndarray) -> np.ndarray:
    lo, hi = KERNEL_DOMAINS[kind]
    ax = np.abs(grid)
    return grid[(ax >= lo) & (ax <= hi)]


def _kernel_error(kind: ErfKernel, x: np.ndarray) -> float:
    if kind is ErfKernel.PIECEWISE_SINE_CDF:
        return float(np.max(np.abs(cdf_piecewise_sine(x) - stats.norm.cdf(x))))
    approx = np.asarray(get_erf_kernel(kind)(x))
    return float(np.max(np.abs(approx - special.erf(x))))


def _time_kernel(kind: ErfKernel, x: np.ndarray, repeats: int) -> float:
    func = cdf_piecewise_sine if kind is ErfKernel.PIECEWISE_SINE_CDF else get_erf_kernel(kind)
    start = time.perf_counter_ns()
    for _ in range(repeats):
        func(x)
    return (time.perf_counter_ns() - start) / (repeats * x.size)


def bench_erf(
    grid: Optional[np.ndarray] = None,
    repeats: int = 20,
    timing: bool = True,
) -> pd.DataFrame:
    """One row per kernel: kernel, grid_max_abs_error and mean_ns_per_call.

    Errors are measured against scipy.special.erf (and scipy.stats.norm.cdf
    for the cdf kernel) over the part of ``grid`` inside the kernel's domain.
    The timing column is wall-clock and is omitted when ``timing`` is false.
    """
    grid = np.linspace(*ERF_GRID) if grid is None else np.asarray(grid, dtype=float)
    records = []
    for kind in ErfKernel:
        x = _kernel_grid(kind, grid)
        record = {"kernel": kind.value, "grid_max_abs_error": _kernel_error(kind, x)}
        if timing:
            record["mean_ns_per_call"] = _time_kernel(kind, x, repeats)
        logger.debug("kernel %s: %s", kind.value, record)
        records.append(record)
    return pd.DataFrame.from_records(records)


def penalty_curves(x: Optional[np.ndarray] = None, shapes: Sequence[float] = DEFAULT_SHAPES) -> pd.DataFrame:
    """Values of |x|, its smooth approximations and x^2 on a grid, one block per s."""
    x = np.linspace(*PENALTY_GRID) if x is None else np.asarray(x, dtype=float)
    frames = []
    for s in shapes:
        frames.append(pd.DataFrame({
            "x": x,
            "s": float(s),
            "abs": np.abs(x),
            "dlasso": smooth_abs(SmoothAbsKind.DLASSO, x, s),
            "sqrt_shift": smooth_abs(SmoothAbsKind.SQRT_SHIFT, x, s),
            "sqrt_lower": sqrt_lower_bound(x, s),
            "log_exp": smooth_abs(SmoothAbsKind.LOG_EXP, x, s),
            "square": np.square(x),
        }))
    return pd.concat(frames, ignore_index=True)


def penalty_gaps(curves: pd.DataFrame) -> pd.DataFrame:
    """Largest distance to |x| of each approximation per s, with the analytic bounds.

    dlasso_bound is 2 s / sqrt(pi) (the maximum of 2 s phi) and log_exp_bound
    is 2 s log 2.
    """
    records = []
    for s, block in curves.groupby("s", sort=True):
        abs_x = block["abs"].to_numpy()
        gap, _ = abs_gap_bound(block["x"].to_numpy(), s)
        records.append({
            "s": s,
            "dlasso_gap": float(np.max(gap)),
            "dlasso_bound": 2.0 * s / SQRT_PI,
            "sqrt_shift_gap": float(np.max(block["sqrt_shift"].to_numpy() - abs_x)),
            "sqrt_lower_gap": float(np.max(abs_x - block["sqrt_lower"].to_numpy())),
            "log_exp_gap": float(np.max(block["log_exp"].to_numpy() - abs_x)),
            "log_exp_bound": 2.0 * s * LOG_2,
        })
    return pd.DataFrame.from_records(records)
