"""
Error-function kernels.

Reference and fast approximate evaluations of erf, its complement, the normal
density with standard deviation 1/sqrt(2) and the normal cdf. Every function
accepts a scalar or an array and returns the same kind; all of them are pure.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Callable, Dict, Union

import numpy as np

from .exceptions import DomainError, check_finite

ArrayLike = Union[float, np.ndarray]

SQRT_PI = math.sqrt(math.pi)
SQRT_2 = math.sqrt(2.0)
TWO_OVER_SQRT_PI = 2.0 / SQRT_PI

# Terms below this magnitude no longer change a double-precision sum near 1.
SERIES_TOL = 1e-17
# Relative size of a term that no longer changes a positive sum.
SERIES_RTOL = 1e-17
MAX_TERMS = 2000

# |x| <= TAYLOR_EDGE: alternating series; up to ASYMPTOTIC_EDGE: the
# cancellation-free scaled series; beyond: asymptotic complement.
TAYLOR_EDGE = 2.0
ASYMPTOTIC_EDGE = 4.0
# erfc(6) < 2.2e-17, so erf rounds to +-1 beyond this.
SATURATION_EDGE = 6.0

# Breakpoint of the piecewise sine approximation to the standard normal cdf.
SINE_CDF_BREAK = 1.513859


class ErfKernel(Enum):
    """Available erf / cdf kernels."""
    REFERENCE = "reference"
    TAYLOR_SMALL = "taylor_small"
    TAYLOR_SCALED = "taylor_scaled"
    ASYMPTOTIC_COMPLEMENT = "asymptotic_complement"
    TANH_FAST = "tanh_fast"
    PIECEWISE_SINE_CDF = "piecewise_sine_cdf"


def _finish(out: np.ndarray, like: np.ndarray) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(out)
    return out


def _saturated(x: np.ndarray, series: Callable[[np.ndarray], np.ndarray]) -> ArrayLike:
    """Apply ``series`` inside ``SATURATION_EDGE``; +-1 outside; clip to [-1, 1]."""
    xa = np.atleast_1d(x).astype(float).ravel()
    out = np.sign(xa)
    inside = np.abs(xa) <= SATURATION_EDGE
    if inside.any():
        out[inside] = series(xa[inside])
    np.clip(out, -1.0, 1.0, out=out)
    return _finish(out.reshape(np.shape(x)), x)


def erf_taylor_small(x: ArrayLike) -> ArrayLike:
    """Alternating Maclaurin series of erf.

    Summed term by term until every term falls below ``SERIES_TOL``. Accurate
    for small arguments; cancellation grows quickly beyond |x| of about 3.
    Arguments past ``SATURATION_EDGE`` return +-1 and the result is clipped
    to [-1, 1].
    """
    return _saturated(check_finite(x), _maclaurin_sum)


def _maclaurin_sum(xa: np.ndarray) -> np.ndarray:
    u = xa * xa
    term = xa.copy()
    total = xa.copy()
    for j in range(1, MAX_TERMS):
        term = term * (-u) / j
        contrib = term / (2 * j + 1)
        total = total + contrib
        if not np.any(TWO_OVER_SQRT_PI * np.abs(contrib) >= SERIES_TOL):
            break
    return TWO_OVER_SQRT_PI * total


def erf_taylor_scaled(x: ArrayLike) -> ArrayLike:
    """Series of erf with an ``exp(-x**2)`` prefactor and positive terms.

    No cancellation, so it stays accurate for moderate |x| where the
    alternating series does not. The sum stops once a term is below
    ``SERIES_RTOL`` of the running total; terms grow before they shrink for
    |x| > 1. Arguments past ``SATURATION_EDGE`` return +-1.
    """
    return _saturated(check_finite(x), _scaled_sum)


def _scaled_sum(xa: np.ndarray) -> np.ndarray:
    u = xa * xa
    prefactor = TWO_OVER_SQRT_PI * xa * np.exp(-u)
    term = np.ones_like(xa)
    total = np.ones_like(xa)
    for j in range(1, MAX_TERMS):
        term = term * (2.0 * u) / (2 * j + 1)
        total = total + term
        if np.all(term < SERIES_RTOL * total):
            break
    return prefactor * total


def _asymptotic_sum(ax: np.ndarray) -> np.ndarray:
    """Optimally truncated asymptotic sum for erfc at positive ``ax``.

    Terms are added while they shrink; the partial sums never exceed 1.
    """
    with np.errstate(over="ignore", divide="ignore"):
        inv = 1.0 / (2.0 * ax * ax)
    total = np.ones_like(ax)
    term = np.ones_like(ax)
    active = np.ones(ax.shape, dtype=bool)
    for j in range(1, MAX_TERMS):
        ratio = (2 * j - 1) * inv
        active &= ratio < 1.0
        if not active.any():
            break
        nxt = -term * ratio
        total = np.where(active, total + nxt, total)
        term = np.where(active, nxt, term)
        active &= np.abs(nxt) >= SERIES_TOL
    return total


def erfc_asymptotic(x: ArrayLike) -> ArrayLike:
    """Asymptotic expansion of erfc with stop-before-growth truncation.

    Only meaningful for |x| of roughly 3 and above; ``x == 0`` is rejected.
    Negative arguments use ``erfc(-x) = 2 - erfc(x)``.
    """
    x = check_finite(x)
    xa = np.atleast_1d(x)
    if np.any(xa == 0):
        raise DomainError("asymptotic erfc expansion is undefined at x = 0")
    ax = np.abs(xa)
    tail = np.exp(-ax * ax) / (ax * SQRT_PI) * _asymptotic_sum(ax)
    out = np.where(xa > 0, tail, 2.0 - tail)
    return _finish(out.reshape(np.shape(x)), x)


def erf_reference(x: ArrayLike) -> ArrayLike:
    """High-accuracy erf.

    Parameters
    ----------
    x : float or ndarray
        Finite argument(s).

    Returns
    -------
    float or ndarray
        erf(x) with absolute error below 1e-14. The alternating series is used
        for |x| <= 2, the scaled series for 2 < |x| <= 4 and the asymptotic
        complement beyond. The result is exactly odd and clipped to [-1, 1].

    Raises
    ------
    DomainError
        If any input is NaN or infinite.
    """
    x = check_finite(x)
    xa = np.atleast_1d(x).ravel()
    ax = np.abs(xa)
    out = np.empty_like(xa)

    small = ax <= TAYLOR_EDGE
    middle = (ax > TAYLOR_EDGE) & (ax <= ASYMPTOTIC_EDGE)
    large = ax > ASYMPTOTIC_EDGE

    if small.any():
        out[small] = erf_taylor_small(xa[small])
    if middle.any():
        out[middle] = erf_taylor_scaled(xa[middle])
    if large.any():
        al = ax[large]
        tail = np.exp(-al * al) / (al * SQRT_PI) * _asymptotic_sum(al)
        out[large] = np.sign(xa[large]) * (1.0 - tail)

    np.clip(out, -1.0, 1.0, out=out)
    return _finish(out.reshape(np.shape(x)), x)


def erfc_reference(x: ArrayLike) -> ArrayLike:
    """Complementary error function, accurate in relative terms in the right tail."""
    x = check_finite(x)
    xa = np.atleast_1d(x).ravel()
    out = np.empty_like(xa)
    tail = xa > ASYMPTOTIC_EDGE
    if tail.any():
        at = xa[tail]
        out[tail] = np.exp(-at * at) / (at * SQRT_PI) * _asymptotic_sum(at)
    if (~tail).any():
        out[~tail] = 1.0 - erf_reference(xa[~tail])
    return _finish(out.reshape(np.shape(x)), x)


def erfc_tail_factor(ax: np.ndarray) -> np.ndarray:
    """Ratio ``erfc(ax) / normal_pdf_halfvar(ax)`` for ``ax > ASYMPTOTIC_EDGE``.

    Lets callers scale a shared density factor instead of forming the tiny
    erfc value first. Never exceeds ``1 / ax``.
    """
    ax = np.asarray(ax, dtype=float)
    return _asymptotic_sum(ax) / ax


def normal_pdf_halfvar(x: ArrayLike) -> ArrayLike:
    """Normal density with mean 0 and standard deviation 1/sqrt(2): exp(-x^2)/sqrt(pi)."""
    x = check_finite(x)
    return _finish(np.exp(-np.square(x)) / SQRT_PI, x)


def normal_cdf_reference(x: ArrayLike, scale: float = 1.0) -> ArrayLike:
    """Normal cdf with mean 0 and the given standard deviation."""
    x = check_finite(x)
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    return _finish(0.5 * np.asarray(erfc_reference(-np.asarray(x) / (scale * SQRT_2))), x)


def erf_tanh_fast(x: ArrayLike) -> ArrayLike:
    """tanh/arctan composite approximation of erf.

    erf(x) ~ tanh(39x / (2 sqrt(pi)) - 111/2 * arctan(35x / (111 sqrt(pi))))
    """
    x = check_finite(x)
    arg = 39.0 * x / (2.0 * SQRT_PI) - 55.5 * np.arctan(35.0 * x / (111.0 * SQRT_PI))
    return _finish(np.tanh(arg), x)


def cdf_piecewise_sine(x: ArrayLike) -> ArrayLike:
    """Piecewise sine/exponential approximation of the standard normal cdf.

    Central branch for |x| <= 1.513859, exponential tails outside. Values are
    clipped to [0, 1] because the tail correction term overshoots for |x|
    above about 18.
    """
    x = check_finite(x)
    xa = np.atleast_1d(x).astype(float)
    ax = np.abs(xa)
    central = (np.sin(np.pi * xa / 10.0) + np.sin(xa)) / (1.9 * SQRT_PI) + 0.5
    with np.errstate(under="ignore"):
        upper = 1.0 - np.exp(-1.78 * ax) + ax * np.exp(-(ax + 10.0))
    lower = 1.0 - upper
    out = np.where(ax <= SINE_CDF_BREAK, central, np.where(xa > 0, upper, lower))
    np.clip(out, 0.0, 1.0, out=out)
    return _finish(out.reshape(np.shape(x)), x)


def cdf_halfvar_piecewise_sine(x: ArrayLike) -> ArrayLike:
    """Fast Phi(x, 0, 1/sqrt(2)) through Phi(x, 0, 1/sqrt(2)) = Phi(x*sqrt(2), 0, 1)."""
    x = check_finite(x)
    return cdf_piecewise_sine(x * SQRT_2)


def erf_from_sine_cdf(x: ArrayLike) -> ArrayLike:
    """erf built from the fast cdf: erf(x) = 2 Phi(x sqrt 2) - 1."""
    x = check_finite(x)
    return _finish(2.0 * np.asarray(cdf_halfvar_piecewise_sine(x)) - 1.0, x)


def erf_from_asymptotic(x: ArrayLike) -> ArrayLike:
    """erf as 1 - erfc from the asymptotic expansion, clipped to [-1, 1].

    The expansion overshoots badly for |x| below about 2.
    """
    x = check_finite(x)
    return _finish(np.clip(1.0 - np.asarray(erfc_asymptotic(x)), -1.0, 1.0), x)


ERF_KERNELS: Dict[ErfKernel, Callable[[ArrayLike], ArrayLike]] = {
    ErfKernel.REFERENCE: erf_reference,
    ErfKernel.TAYLOR_SMALL: erf_taylor_small,
    ErfKernel.TAYLOR_SCALED: erf_taylor_scaled,
    ErfKernel.TANH_FAST: erf_tanh_fast,
    ErfKernel.PIECEWISE_SINE_CDF: erf_from_sine_cdf,
}


def get_erf_kernel(kind: ErfKernel) -> Callable[[ArrayLike], ArrayLike]:
    """Return the erf evaluator for a kernel kind."""
    if kind is ErfKernel.ASYMPTOTIC_COMPLEMENT:
        return erf_from_asymptotic
    return ERF_KERNELS[kind]
