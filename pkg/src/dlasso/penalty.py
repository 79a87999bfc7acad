"""
The dlasso penalty p(x, s) = x * erf(x / s) and smooth |x| surrogates.

All functions are vectorized over ``x``; ``s`` is a positive scalar.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Tuple

import numpy as np

from .exceptions import ParameterError, check_finite, check_scale
from .special_fn import (
    ASYMPTOTIC_EDGE,
    SQRT_PI,
    ArrayLike,
    _finish,
    erf_reference,
    erf_tanh_fast,
    erfc_reference,
    erfc_tail_factor,
    normal_pdf_halfvar,
)

LOG_2 = math.log(2.0)


class SmoothAbsKind(Enum):
    """Smooth approximations of the absolute value."""
    DLASSO = "dlasso"
    SQRT_SHIFT = "sqrt_shift"
    LOG_EXP = "log_exp"


class DlassoPenalty:
    """dlasso penalty with a fixed shape.

    Parameters
    ----------
    s : float
        Shape parameter, strictly positive. Small values approach |x|;
        ``2/sqrt(pi)`` makes the penalty behave like x**2 near zero.
    fast : bool, default=False
        Evaluate erf with the tanh/arctan approximation instead of the
        reference series.
    """

    def __init__(self, s: float, fast: bool = False):
        self.s = check_scale(s)
        self.fast = fast
        self._erf = erf_tanh_fast if fast else erf_reference

    def __repr__(self) -> str:
        return f"DlassoPenalty(s={self.s!r}, fast={self.fast!r})"

    def value(self, x: ArrayLike) -> ArrayLike:
        """p(x, s) = x * erf(x / s); lies in [0, |x|]."""
        x = check_finite(x)
        return _finish(x * np.asarray(self._erf(x / self.s)), x)

    def grad(self, x: ArrayLike) -> ArrayLike:
        """erf(t) + 2 t phi(t) with t = x / s."""
        x = check_finite(x)
        t = x / self.s
        return _finish(np.asarray(self._erf(t)) + 2.0 * t * np.asarray(normal_pdf_halfvar(t)), x)

    def hess(self, x: ArrayLike) -> ArrayLike:
        """4 phi(t) (1 - t^2) / s with t = x / s; positive iff |x| < s."""
        x = check_finite(x)
        t = x / self.s
        return _finish(4.0 * np.asarray(normal_pdf_halfvar(t)) * (1.0 - t * t) / self.s, x)

    def grad_ratio(self, x: ArrayLike, eps: float = 1e-8) -> ArrayLike:
        """grad(x) / x with the analytic limit 4 / (s sqrt(pi)) where |x| < eps."""
        x = check_finite(x)
        xa = np.atleast_1d(x)
        limit = 4.0 / (self.s * SQRT_PI)
        near_zero = np.abs(xa) < eps
        safe = np.where(near_zero, 1.0, xa)
        ratio = np.where(near_zero, limit, np.asarray(self.grad(safe)) / safe)
        return _finish(ratio.reshape(np.shape(x)), x)

    def total(self, beta: np.ndarray) -> float:
        """Sum of penalty values over a coefficient vector."""
        return float(np.sum(self.value(np.asarray(beta, dtype=float))))


def dlasso_value(x: ArrayLike, s: float) -> ArrayLike:
    """dlasso penalty x * erf(x / s) evaluated with the reference erf."""
    return DlassoPenalty(s).value(x)


def dlasso_grad(x: ArrayLike, s: float) -> ArrayLike:
    """First derivative of the dlasso penalty in x."""
    return DlassoPenalty(s).grad(x)


def dlasso_hess(x: ArrayLike, s: float) -> ArrayLike:
    """Second derivative of the dlasso penalty in x."""
    return DlassoPenalty(s).hess(x)


def dlasso_hess_expanded(x: ArrayLike, s: float) -> ArrayLike:
    """Second derivative in its unsimplified three-term form.

    2 phi(t)/s + 2 phi(t)/s - 4 t^3 phi(t) / x, which equals ``dlasso_hess``
    away from x = 0.
    """
    s = check_scale(s)
    x = check_finite(x)
    t = x / s
    phi = np.asarray(normal_pdf_halfvar(t))
    with np.errstate(divide="ignore", invalid="ignore"):
        cubic = np.where(x == 0, 0.0, 4.0 * t ** 3 * phi / np.where(x == 0, 1.0, x))
    return _finish(4.0 * phi / s - cubic, x)


def abs_gap_bound(x: ArrayLike, s: float) -> Tuple[ArrayLike, ArrayLike]:
    """Gap |x| - p(x, s) and its bound 2 s phi(x/s, 0, 1/sqrt(2)).

    Returns
    -------
    gap, bound : float or ndarray
        ``0 <= gap <= bound`` holds in floating point: in the far tail the gap
        is formed from the same density factor as the bound.
    """
    s = check_scale(s)
    x = check_finite(x)
    xa = np.atleast_1d(x)
    t = np.abs(xa) / s
    scaled = s * np.asarray(normal_pdf_halfvar(t))
    bound = 2.0 * scaled

    gap = np.empty_like(t)
    tail = t > ASYMPTOTIC_EDGE
    if tail.any():
        # |x| erfc(t) = s t erfc(t) = s phi(t) * t * (erfc(t) / phi(t))
        gap[tail] = scaled[tail] * (t[tail] * erfc_tail_factor(t[tail]))
    if (~tail).any():
        gap[~tail] = np.abs(xa[~tail]) * np.asarray(erfc_reference(t[~tail]))
    return _finish(gap.reshape(np.shape(x)), x), _finish(bound.reshape(np.shape(x)), x)


def sqrt_shift(x: ArrayLike, s: float) -> ArrayLike:
    """sqrt(x^2 + s^2), an upper bound of |x|."""
    s = check_scale(s)
    x = check_finite(x)
    return _finish(np.hypot(x, s), x)


def sqrt_lower_bound(x: ArrayLike, s: float) -> ArrayLike:
    """x^2 / sqrt(x^2 + s^2), a lower bound of |x|; used only for comparisons."""
    s = check_scale(s)
    x = check_finite(x)
    return _finish(np.square(x) / np.hypot(x, s), x)


def log_exp(x: ArrayLike, s: float) -> ArrayLike:
    """s log(2 + e^{-x/s} + e^{x/s}), rearranged around m = |x|/s to avoid overflow."""
    s = check_scale(s)
    x = check_finite(x)
    t = x / s
    m = np.abs(t)
    inner = 2.0 * np.exp(-m) + np.exp(-t - m) + np.exp(t - m)
    return _finish(s * (m + np.log(inner)), x)


def smooth_abs(kind: SmoothAbsKind, x: ArrayLike, s: float) -> ArrayLike:
    """Evaluate one of the smooth |x| approximations."""
    try:
        kind = SmoothAbsKind(kind)
    except ValueError:
        raise ParameterError(f"unknown smooth |x| kind: {kind!r}") from None
    if kind is SmoothAbsKind.DLASSO:
        return dlasso_value(x, s)
    if kind is SmoothAbsKind.SQRT_SHIFT:
        return sqrt_shift(x, s)
    if kind is SmoothAbsKind.LOG_EXP:
        return log_exp(x, s)
    raise ParameterError(f"unknown smooth |x| kind: {kind!r}")
