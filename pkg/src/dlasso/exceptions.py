"""
Error types raised by the dlasso package.

Each error refines a builtin so callers that already catch ``ValueError`` or
``numpy.linalg.LinAlgError`` keep working.
"""

from typing import Any, List, Optional

import numpy as np


class DlassoError(Exception):
    """Base class for all dlasso errors."""


class ParameterError(DlassoError, ValueError):
    """Invalid penalty, solver or grid parameter."""


class DomainError(ParameterError):
    """Non-finite input where a finite real is required."""


class ShapeError(DlassoError, ValueError):
    """Array dimensions do not agree."""


class DatasetError(DlassoError, ValueError):
    """Problem reading or standardizing a dataset."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class SingularSystemError(DlassoError, np.linalg.LinAlgError):
    """The ridge system of an iteration could not be factorized."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} at iteration {iteration}"
        super().__init__(message)


class CriterionError(DlassoError, ValueError):
    """A selection criterion is undefined for the given fit."""


class TuningError(DlassoError, RuntimeError):
    """Every grid point of a tuning run failed."""

    def __init__(self, message: str, failures: Optional[List[Any]] = None):
        self.failures = list(failures or [])
        detail = f"{message}: {len(self.failures)} failed grid points"
        first = getattr(self.failures[0], "error", None) if self.failures else None
        if first:
            detail += f" (first: {first})"
        super().__init__(detail)


class ConvergenceError(DlassoError, RuntimeError):
    """Raised by strict callers when a fit did not converge."""


def check_finite(value: Any, name: str = "x") -> np.ndarray:
    """Return ``value`` as a float array, raising DomainError on NaN or inf."""
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def check_scale(s: Any) -> float:
    """Validate a penalty shape parameter."""
    try:
        s = float(s)
    except (TypeError, ValueError):
        raise ParameterError(f"shape parameter s must be a real number, got {s!r}")
    if not np.isfinite(s) or s <= 0:
        raise ParameterError(f"shape parameter s must be positive and finite, got {s}")
    return s
