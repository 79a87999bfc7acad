"""
Configuration objects for fits, tuning runs and whole experiments.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import yaml

from .exceptions import ParameterError, check_scale

RIDGE_LIKE_S = 2.0 / math.sqrt(math.pi)
SIMULATION_METHODS = ("dlasso", "dlasso.s", "lasso", "ridge", "ols")


class InitKind(Enum):
    """Starting point of the reweighted-ridge iteration."""
    RIDGE_WARM_START = "ridge"
    ZEROS = "zeros"
    SUPPLIED = "supplied"


class Method(Enum):
    """Estimators reachable from the command line."""
    DLASSO = "dlasso"
    OLS = "ols"
    RIDGE = "ridge"
    LASSO = "lasso"


@dataclass(frozen=True)
class PenaltyParams:
    """Shape ``s`` and weight ``lam`` of the dlasso penalty."""
    s: float
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "s", check_scale(self.s))
        lam = float(self.lam)
        if not math.isfinite(lam) or lam < 0:
            raise ParameterError(f"lambda must be non-negative and finite, got {self.lam}")
        object.__setattr__(self, "lam", lam)

    def to_dict(self) -> Dict[str, float]:
        return {"s": self.s, "lambda": self.lam}


def default_s(n: int) -> float:
    """Shape used when none is given: 1/sqrt(n), the lasso-like regime."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    return 1.0 / math.sqrt(n)


@dataclass
class FitConfig:
    """Settings of a single dlasso fit."""
    params: PenaltyParams
    tol: float = 1e-8
    max_iter: int = 500
    zero_ratio_eps: float = 1e-8
    report_zero_tol: float = 1e-4
    init: InitKind = InitKind.RIDGE_WARM_START
    beta0: Optional[np.ndarray] = None
    fast_erf: bool = False
    max_halvings: int = 20

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ParameterError("; ".join(errors))

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors."""
        errors = []
        if not self.tol > 0:
            errors.append("tol must be positive")
        if self.max_iter < 1:
            errors.append("max_iter must be at least 1")
        if not self.zero_ratio_eps > 0:
            errors.append("zero_ratio_eps must be positive")
        if not self.report_zero_tol > 0:
            errors.append("report_zero_tol must be positive")
        if self.init is InitKind.SUPPLIED and self.beta0 is None:
            errors.append("init=supplied requires beta0")
        if self.max_halvings < 0:
            errors.append("max_halvings must be non-negative")
        return errors

    def with_params(self, params: PenaltyParams) -> "FitConfig":
        """Copy of this config with different penalty parameters."""
        return replace(self, params=params)


def _known_criterion(name: str) -> bool:
    key = name.strip().lower()
    return key in ("aic", "bic", "gcv", "cv") or (key.startswith("cv") and key[2:].isdigit())


def default_s_values(n: int) -> List[float]:
    return sorted({0.001, 0.01, default_s(n), 0.1, RIDGE_LIKE_S, 1.0, 10.0, 100.0})


@dataclass
class TuningGrid:
    """Grid of (lambda, s) pairs searched by ``tune``."""
    lambdas: Sequence[float]
    s_values: Sequence[float]

    def __post_init__(self):
        self.lambdas = sorted(float(v) for v in self.lambdas)
        self.s_values = sorted(float(v) for v in self.s_values)
        if not self.lambdas or not self.s_values:
            raise ParameterError("tuning grid must be non-empty")
        for lam in self.lambdas:
            if not math.isfinite(lam) or lam < 0:
                raise ParameterError(f"grid lambda must be non-negative, got {lam}")
        for s in self.s_values:
            check_scale(s)

    @classmethod
    def default(cls, n: int, num_lambdas: int = 25) -> "TuningGrid":
        """Log-spaced lambdas on [1e-3, 1e2] and the standard shape values."""
        return cls(list(np.logspace(-3, 2, num_lambdas)), default_s_values(n))

    def points(self) -> List[PenaltyParams]:
        """All grid points, lambdas outer, shapes inner."""
        return [PenaltyParams(s=s, lam=lam) for lam in self.lambdas for s in self.s_values]

    def __len__(self) -> int:
        return len(self.lambdas) * len(self.s_values)


@dataclass
class GridSettings:
    """Serializable description of a tuning grid."""
    lambda_min: float = 1e-3
    lambda_max: float = 1e2
    num_lambdas: int = 25
    lambdas: Optional[List[float]] = None
    s_values: Optional[List[float]] = None

    def build(self, n: int) -> TuningGrid:
        lambdas = self.lambdas
        if lambdas is None:
            lambdas = list(np.logspace(math.log10(self.lambda_min), math.log10(self.lambda_max), self.num_lambdas))
        s_values = self.s_values if self.s_values is not None else default_s_values(n)
        return TuningGrid(lambdas, s_values)


@dataclass
class SolverSettings:
    """Serializable subset of FitConfig."""
    tol: float = 1e-8
    max_iter: int = 500
    zero_ratio_eps: float = 1e-8
    report_zero_tol: float = 1e-4
    init: str = InitKind.RIDGE_WARM_START.value
    fast_erf: bool = False

    def build(self, params: PenaltyParams) -> FitConfig:
        return FitConfig(
            params=params,
            tol=self.tol,
            max_iter=self.max_iter,
            zero_ratio_eps=self.zero_ratio_eps,
            report_zero_tol=self.report_zero_tol,
            init=InitKind(self.init),
            fast_erf=self.fast_erf,
        )


@dataclass
class SimulationSettings:
    """Settings of a simulation run."""
    scenario: int = 1
    replicates: int = 50
    n_total: int = 240
    n_train: int = 40
    methods: List[str] = field(default_factory=lambda: list(SIMULATION_METHODS))
    criterion: str = "cv"


@dataclass
class ExperimentConfig:
    """Complete configuration of a command-line run."""
    name: str = "dlasso"
    description: Optional[str] = None

    method: str = Method.DLASSO.value
    s: Optional[float] = None
    lam: Optional[float] = None
    criterion: str = "bic"
    cv_folds: int = 10
    seed: int = 0

    solver: SolverSettings = field(default_factory=SolverSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)

    data_path: Optional[str] = None
    response: str = "lpsa"
    output_dir: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """Create from dictionary."""
        data = dict(data)
        try:
            if "solver" in data and isinstance(data["solver"], dict):
                data["solver"] = SolverSettings(**data["solver"])
            if "grid" in data and isinstance(data["grid"], dict):
                data["grid"] = GridSettings(**data["grid"])
            if "simulation" in data and isinstance(data["simulation"], dict):
                data["simulation"] = SimulationSettings(**data["simulation"])
            return cls(**data)
        except TypeError as exc:
            raise ParameterError(f"Invalid configuration: {exc}")

    def save(self, path: Union[str, Path]) -> None:
        """Save configuration to a .yaml/.yml or .json file."""
        path = Path(path)
        config_dict = self.to_dict()

        if path.suffix in (".yaml", ".yml"):
            with open(path, "w") as f:
                yaml.safe_dump(config_dict, f, default_flow_style=False, sort_keys=True)
        elif path.suffix == ".json":
            with open(path, "w") as f:
                json.dump(config_dict, f, indent=2, sort_keys=True)
        else:
            raise ParameterError(f"Unsupported config format: {path.suffix}")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """Load configuration from file."""
        path = Path(path)

        try:
            if path.suffix in (".yaml", ".yml"):
                with open(path, "r") as f:
                    data = yaml.safe_load(f) or {}
            elif path.suffix == ".json":
                with open(path, "r") as f:
                    data = json.load(f)
            else:
                raise ParameterError(f"Unsupported config format: {path.suffix}")
        except (yaml.YAMLError, json.JSONDecodeError) as exc:
            raise ParameterError(f"Cannot parse {path}: {exc}")

        if not isinstance(data, dict):
            raise ParameterError(f"{path} must contain a mapping")
        return cls.from_dict(data)

    def override(self, **kwargs) -> "ExperimentConfig":
        """Create a new config with overridden values; ``None`` values are skipped.

        Dotted keys such as ``"solver.tol"`` reach nested sections.
        """
        config_dict = self.to_dict()

        for key, value in kwargs.items():
            if value is None:
                continue
            if "." in key:
                parts = key.split(".")
                current = config_dict
                for part in parts[:-1]:
                    current = current.setdefault(part, {})
                current[parts[-1]] = value
            else:
                config_dict[key] = value

        return self.from_dict(config_dict)

    def validate(self) -> List[str]:
        """Validate configuration and return list of errors."""
        errors = []

        if self.method not in {m.value for m in Method}:
            errors.append(f"Unknown method '{self.method}'")
        if not _known_criterion(self.criterion):
            errors.append(f"Unknown criterion '{self.criterion}'")
        if self.s is not None and not self.s > 0:
            errors.append("s must be positive")
        if self.lam is not None and self.lam < 0:
            errors.append("lambda must be non-negative")
        if self.cv_folds < 2:
            errors.append("cv_folds must be at least 2")
        if self.solver.tol <= 0:
            errors.append("solver.tol must be positive")
        if self.solver.max_iter < 1:
            errors.append("solver.max_iter must be at least 1")
        if self.grid.num_lambdas < 1:
            errors.append("grid.num_lambdas must be at least 1")
        if self.simulation.scenario not in (1, 2, 3):
            errors.append("simulation.scenario must be 1, 2 or 3")
        if self.simulation.replicates < 1:
            errors.append("simulation.replicates must be at least 1")
        if self.simulation.n_train >= self.simulation.n_total:
            errors.append("simulation.n_train must be smaller than simulation.n_total")
        if not _known_criterion(self.simulation.criterion):
            errors.append(f"Unknown criterion '{self.simulation.criterion}'")
        for name in self.simulation.methods:
            if name not in SIMULATION_METHODS:
                errors.append(f"Unknown simulation method '{name}'")

        return errors
