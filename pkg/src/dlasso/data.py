"""
Regression datasets and the CSV loader.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import DatasetError, ShapeError
from .preprocessing import Standardization, Standardizer

logger = logging.getLogger(__name__)

PROSTATE_COLUMNS = ["lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45", "lpsa"]


@dataclass
class Dataset:
    """Design matrix, response and the standardization that produced them.

    Attributes
    ----------
    X : ndarray of shape (n, p)
        Predictors on the working (usually standardized) scale.
    y : ndarray of shape (n,)
        Response on the working (usually centered) scale.
    feature_names : list of str
        One label per column of X.
    standardization : Standardization
        Statistics used to map coefficients back to original units.
    """
    X: np.ndarray
    y: np.ndarray
    feature_names: List[str] = field(default_factory=list)
    standardization: Optional[Standardization] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2:
            raise ShapeError(f"X must be two-dimensional, got shape {self.X.shape}")
        if self.y.ndim != 1 or self.y.shape[0] != self.X.shape[0]:
            raise ShapeError(f"y of shape {self.y.shape} does not match X of shape {self.X.shape}")
        n, p = self.X.shape
        if n < 1 or p < 1:
            raise ShapeError(f"need n >= 1 and p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise DatasetError("dataset contains non-finite values")
        if not self.feature_names:
            self.feature_names = [f"x{j + 1}" for j in range(p)]
        if len(self.feature_names) != p:
            raise ShapeError(f"{len(self.feature_names)} feature names for {p} columns")
        if self.standardization is None:
            self.standardization = Standardization.identity(p, self.feature_names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def gram(self) -> np.ndarray:
        """X'X."""
        return self.X.T @ self.X

    @cached_property
    def xty(self) -> np.ndarray:
        """X'y."""
        return self.X.T @ self.y

    def rss(self, beta: np.ndarray) -> float:
        """Residual sum of squares of a coefficient vector."""
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.p,):
            raise ShapeError(f"beta of shape {beta.shape} does not match p={self.p}")
        r = self.y - self.X @ beta
        return float(r @ r)

    def subset(self, rows: Sequence[int]) -> "Dataset":
        """Rows of this dataset, keeping its standardization metadata."""
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], list(self.feature_names), self.standardization)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "n": self.n,
            "p": self.p,
            "feature_names": list(self.feature_names),
            "standardization": self.standardization.to_dict(),
        }

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        feature_names: Optional[List[str]] = None,
        standardize: bool = True,
    ) -> "Dataset":
        """Build a dataset, standardizing predictors and centering the response by default."""
        if not standardize:
            return cls(X, y, list(feature_names or []))
        scaler = Standardizer()
        Xs, ys = scaler.fit_transform(X, y, feature_names)
        st = scaler.standardization
        return cls(Xs, ys, list(st.feature_names), st)


def load_dataset(path: Union[str, Path], response: str, standardize: bool = True) -> Dataset:
    """Read a CSV file with a header row into a Dataset.

    Every column other than ``response`` is a predictor. All cells must parse
    as finite reals.

    Raises
    ------
    DatasetError
        Empty file, missing response column, non-numeric or missing cell
        (with its row and column), or a zero-variance predictor.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path} is empty")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}")

    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.shape[0] == 0:
        raise DatasetError(f"{path} has a header but no rows")
    if response not in frame.columns:
        raise DatasetError(f"response column not found in {path}", column=response)

    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    values = numeric.to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DatasetError(
            f"cell value {frame.iat[row, col]!r} is not a finite number",
            row=int(row) + 1,
            column=frame.columns[col],
        )

    feature_names = [c for c in frame.columns if c != response]
    if not feature_names:
        raise DatasetError(f"{path} has no predictor columns")
    X = numeric[feature_names].to_numpy(dtype=float)
    y = numeric[response].to_numpy(dtype=float)
    logger.debug("loaded %s: n=%d, p=%d, response=%s", path, X.shape[0], X.shape[1], response)
    return Dataset.from_arrays(X, y, feature_names, standardize=standardize)
