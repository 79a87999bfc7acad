"""
Column standardization fitted on one sample and applied to others.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .exceptions import DatasetError, ShapeError


@dataclass
class Standardization:
    """Per-column (mean, scale) of the predictors plus the response mean."""
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float = 0.0
    feature_names: List[str] = field(default_factory=list)

    @classmethod
    def identity(cls, p: int, feature_names: Optional[List[str]] = None) -> "Standardization":
        """No-op standardization for data given on its working scale."""
        return cls(np.zeros(p), np.ones(p), 0.0, list(feature_names or []))

    def coef_to_original(self, beta: np.ndarray) -> Tuple[np.ndarray, float]:
        """Map standardized coefficients to original units; returns (coef, intercept)."""
        coef = np.asarray(beta, dtype=float) / self.x_scale
        intercept = float(self.y_mean - self.x_mean @ coef)
        return coef, intercept

    def coef_to_standardized(self, coef: np.ndarray) -> np.ndarray:
        """Inverse of ``coef_to_original`` for the slope part."""
        return np.asarray(coef, dtype=float) * self.x_scale

    def to_dict(self) -> Dict[str, object]:
        """Convert to dictionary for serialization."""
        return {
            "x_mean": self.x_mean.tolist(),
            "x_scale": self.x_scale.tolist(),
            "y_mean": self.y_mean,
            "feature_names": list(self.feature_names),
        }


class Standardizer:
    """Centers and scales predictors, centers the response."""

    def __init__(self, ddof: int = 1):
        self.ddof = ddof
        self.standardization: Optional[Standardization] = None
        self.is_fitted = False

    def fit(self, X: np.ndarray, y: np.ndarray, feature_names: Optional[List[str]] = None) -> "Standardizer":
        """Learn column means and sample standard deviations."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ShapeError(f"X of shape {X.shape} and y of shape {y.shape} do not agree")
        if X.shape[0] <= self.ddof:
            raise DatasetError(f"need more than {self.ddof} rows to standardize, got {X.shape[0]}")
        names = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(X.shape[1])]

        mean = X.mean(axis=0)
        scale = X.std(axis=0, ddof=self.ddof)
        for j, sd in enumerate(scale):
            if not sd > 0:
                raise DatasetError("zero variance, cannot standardize", column=names[j])

        self.standardization = Standardization(mean, scale, float(y.mean()), names)
        self.is_fitted = True
        return self

    def transform(self, X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Apply the fitted statistics."""
        if not self.is_fitted:
            raise ValueError("Standardizer must be fitted first")
        st = self.standardization
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != st.x_mean.shape[0]:
            raise ShapeError(f"expected {st.x_mean.shape[0]} columns, got array of shape {X.shape}")
        return (X - st.x_mean) / st.x_scale, np.asarray(y, dtype=float) - st.y_mean

    def fit_transform(self, X: np.ndarray, y: np.ndarray, feature_names: Optional[List[str]] = None) -> Tuple[np.ndarray, np.ndarray]:
        return self.fit(X, y, feature_names).transform(X, y)

    def inverse_transform(self, X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Undo ``transform``."""
        if not self.is_fitted:
            raise ValueError("Standardizer must be fitted first")
        st = self.standardization
        return np.asarray(X, dtype=float) * st.x_scale + st.x_mean, np.asarray(y, dtype=float) + st.y_mean
