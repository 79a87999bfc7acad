"""
Command line interface.

Exit status is 0 on success, 1 for usage and input errors and 2 for
computation errors (singular systems, failed tuning, non-convergence under
``--strict``). Logs go to stderr; stdout carries only CSV or JSON.
"""

import logging
import os
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import click
import numpy as np
import pandas as pd
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .bench import bench_erf, penalty_curves, penalty_gaps
from .config import ExperimentConfig, Method, PenaltyParams, TuningGrid, default_s
from .data import load_dataset
from .exceptions import (
    ConvergenceError,
    CriterionError,
    DatasetError,
    ParameterError,
    ShapeError,
    SingularSystemError,
    TuningError,
)
from .model_select import SelectionCriterion, make_fitter, tune
from .reports import build_fit_report, build_tune_report, dump_report
from .scalar_threshold import threshold_curve
from .simgen import ScenarioSpec, SimMethod, SimulationPlan, rows_to_frame, run_simulation, summarize

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
OUTPUT_DIR_ENV = "DLASSO_OUTPUT_DIR"

USAGE_ERRORS = (ParameterError, ShapeError, DatasetError, OSError)
COMPUTATION_ERRORS = (SingularSystemError, TuningError, CriterionError, ConvergenceError, np.linalg.LinAlgError)


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.INFO
    handler = RichHandler(console=Console(stderr=True), show_path=False, show_time=False)
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)


class DlassoGroup(click.Group):
    """Command group that maps library errors to exit codes."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as exc:
            exc.exit_code = 1
            raise

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as exc:
            exc.exit_code = 1
            raise
        except USAGE_ERRORS as exc:
            logger.error("%s", exc)
            ctx.exit(1)
        except COMPUTATION_ERRORS as exc:
            logger.error("%s", exc)
            ctx.exit(2)


def _float_list(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[float]]:
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _str_list(ctx: click.Context, param: click.Parameter, value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [v.strip() for v in value.split(",") if v.strip()]


def _output_dir(cfg: Optional[ExperimentConfig] = None) -> Optional[Path]:
    if cfg is not None and cfg.output_dir:
        return Path(cfg.output_dir)
    env = os.getenv(OUTPUT_DIR_ENV)
    return Path(env) if env else None


def _emit(text: str, out: Optional[Path], default_name: Optional[str], cfg: Optional[ExperimentConfig] = None) -> None:
    """Write to ``out``, else to the output directory, else to stdout."""
    target = out
    if target is None and default_name is not None:
        directory = _output_dir(cfg)
        if directory is not None:
            directory.mkdir(parents=True, exist_ok=True)
            target = directory / default_name
    if target is None:
        click.echo(text, nl=False)
        return
    Path(target).write_text(text)
    logger.info("wrote %s", target)


def _csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _load_config(config_path: Optional[Path], **overrides) -> ExperimentConfig:
    cfg = ExperimentConfig.load(config_path) if config_path is not None else ExperimentConfig()
    cfg = cfg.override(**overrides)
    errors = cfg.validate()
    if errors:
        raise click.UsageError("; ".join(errors))
    return cfg


def _load_data(cfg: ExperimentConfig, standardize: bool = True):
    if not cfg.data_path:
        raise click.UsageError("--data is required (or data_path in --config)")
    return load_dataset(cfg.data_path, cfg.response, standardize=standardize)


def _grid(cfg: ExperimentConfig, n: int, s_values: Optional[Sequence[float]] = None) -> TuningGrid:
    grid = cfg.grid.build(n)
    return TuningGrid(grid.lambdas, s_values if s_values is not None else grid.s_values)


def _common(func: Callable) -> Callable:
    """Options shared by the data-driven commands."""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="YAML or JSON experiment config."),
        click.option("--data", "data_path", type=click.Path(dir_okay=False), help="CSV file with a header row."),
        click.option("--response", help="Response column (default: lpsa)."),
        click.option("--method", type=click.Choice([m.value for m in Method]), help="Estimator (default: dlasso)."),
        click.option("--cv-folds", type=int, help="Folds for cross-validation criteria."),
        click.option("--seed", type=int, help="Seed of the fold assignment."),
        click.option("--tol", type=float, help="Solver tolerance."),
        click.option("--max-iter", type=int, help="Solver iteration cap."),
        click.option("--fast-erf", is_flag=True, default=None, help="Use the tanh/arctan erf approximation."),
        click.option("--no-standardize", is_flag=True, help="Fit on the raw columns."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _grid_options(func: Callable) -> Callable:
    options = [
        click.option("--lambdas", callback=_float_list, help="Comma-separated lambda grid."),
        click.option("--num-lambdas", type=int, help="Size of the log-spaced lambda grid."),
        click.option("--lambda-min", type=float, help="Smallest grid lambda."),
        click.option("--lambda-max", type=float, help="Largest grid lambda."),
        click.option("--s-values", callback=_float_list, help="Comma-separated shape grid."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group(cls=DlassoGroup)
@click.option("--verbose", "-v", is_flag=True, help="Debug logging.")
@click.option("--quiet", "-q", is_flag=True, help="Errors only.")
@click.version_option(version=__version__, prog_name="dlasso")
def cli(verbose: bool, quiet: bool):
    """dlasso: penalized regression with the differentiable lasso penalty."""
    load_dotenv()
    setup_logging(verbose, quiet)


@cli.command()
@_common
@click.option("--s", "s", type=float, help="Shape parameter (default: 1/sqrt(n)).")
@click.option("--lambda", "lam", type=float, help="Penalty weight.")
@click.option("--tune-lambda", "tune_lambda", help="Tune lambda with s fixed: aic, bic, gcv, cv or cv<k>.")
@click.option("--init", type=click.Choice(["ridge", "zeros"]), help="Starting point of the iteration.")
@click.option("--strict", is_flag=True, help="Exit with status 2 if the fit did not converge.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="JSON output file.")
def fit(config_path, data_path, response, method, cv_folds, seed, tol, max_iter, fast_erf, no_standardize,
        s, lam, tune_lambda, init, strict, out):
    """Fit one model and write a JSON report."""
    if lam is not None and tune_lambda is not None:
        raise click.UsageError("--lambda and --tune-lambda are mutually exclusive")
    cfg = _load_config(
        config_path, data_path=data_path, response=response, method=method, s=s, lam=lam,
        cv_folds=cv_folds, seed=seed, **{"solver.tol": tol, "solver.max_iter": max_iter,
                                         "solver.fast_erf": fast_erf, "solver.init": init},
    )
    data = _load_data(cfg, standardize=not no_standardize)
    method = Method(cfg.method)
    shape = cfg.s if cfg.s is not None else default_s(data.n)
    fit_config = cfg.solver.build(PenaltyParams(s=shape, lam=cfg.lam or 0.0))

    criterion = score = None
    if tune_lambda is not None:
        crit = SelectionCriterion.parse(tune_lambda, k=cfg.cv_folds, seed=cfg.seed)
        tuned = tune(data, _grid(cfg, data.n, [shape]), crit, method=method, fit_config=fit_config)
        result, lam_used = tuned.best_fit, tuned.best.lam
        criterion, score = str(crit), tuned.best_score
    else:
        if cfg.lam is None and method not in (Method.OLS,):
            raise click.UsageError("--lambda or --tune-lambda is required for this method")
        lam_used = cfg.lam or 0.0
        result = make_fitter(method, fit_config)(data, PenaltyParams(s=shape, lam=lam_used))

    if strict and not result.converged:
        raise ConvergenceError(f"fit did not converge after {result.iterations} iterations")
    report = build_fit_report(
        data, result,
        lam=None if method is Method.OLS else lam_used,
        s=shape if method is Method.DLASSO else None,
        criterion=criterion, score=score,
    )
    _emit(dump_report(report), out, "fit.json", cfg)


@cli.command(name="tune")
@_common
@_grid_options
@click.option("--criterion", help="aic, bic, gcv, cv or cv<k> (default: bic).")
@click.option("--table", type=click.Path(dir_okay=False, path_type=Path), help="CSV score table output.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="JSON output file.")
def tune_command(config_path, data_path, response, method, cv_folds, seed, tol, max_iter, fast_erf, no_standardize,
                 lambdas, num_lambdas, lambda_min, lambda_max, s_values, criterion, table, out):
    """Grid-search (lambda, s) by a selection criterion."""
    cfg = _load_config(
        config_path, data_path=data_path, response=response, method=method, criterion=criterion,
        cv_folds=cv_folds, seed=seed,
        **{"solver.tol": tol, "solver.max_iter": max_iter, "solver.fast_erf": fast_erf,
           "grid.lambdas": lambdas, "grid.num_lambdas": num_lambdas, "grid.lambda_min": lambda_min,
           "grid.lambda_max": lambda_max, "grid.s_values": s_values},
    )
    data = _load_data(cfg, standardize=not no_standardize)
    crit = SelectionCriterion.parse(cfg.criterion, k=cfg.cv_folds, seed=cfg.seed)
    grid = _grid(cfg, data.n)
    fit_config = cfg.solver.build(PenaltyParams(s=default_s(data.n)))
    tuned = tune(data, grid, crit, method=Method(cfg.method), fit_config=fit_config)

    frame = pd.DataFrame([row.to_dict() for row in tuned.rows])
    if table is not None or _output_dir(cfg) is not None:
        _emit(_csv(frame), table, "tune_scores.csv", cfg)
    _emit(dump_report(build_tune_report(data, tuned)), out, "tune.json", cfg)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), help="YAML or JSON experiment config.")
@click.option("--scenario", type=click.Choice(["1", "2", "3"]), help="Simulation design (default: 1).")
@click.option("--replicates", type=int, help="Number of replicates (default: 50).")
@click.option("--seed", type=int, help="Seed of replicate 0; replicate r uses seed + r.")
@click.option("--n-total", type=int, help="Observations per replicate (default: 240).")
@click.option("--n-train", type=int, help="Training observations (default: 40).")
@click.option("--methods", callback=_str_list, help="Comma-separated: dlasso, dlasso.s, lasso, ridge, ols.")
@click.option("--criterion", help="Tuning criterion (default: cv with --cv-folds folds).")
@click.option("--cv-folds", type=int, help="Folds for cross-validation (default: 10).")
@_grid_options
@click.option("--summary", type=click.Path(dir_okay=False, path_type=Path), help="CSV of per-method medians.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="CSV output file.")
def simulate(config_path, scenario, replicates, seed, n_total, n_train, methods, criterion, cv_folds,
             lambdas, num_lambdas, lambda_min, lambda_max, s_values, summary, out):
    """Run a simulation scenario and write one CSV row per replicate and method."""
    cfg = _load_config(
        config_path, seed=seed, cv_folds=cv_folds,
        **{"simulation.scenario": int(scenario) if scenario else None, "simulation.replicates": replicates,
           "simulation.n_total": n_total, "simulation.n_train": n_train, "simulation.methods": methods,
           "simulation.criterion": criterion, "grid.lambdas": lambdas, "grid.num_lambdas": num_lambdas,
           "grid.lambda_min": lambda_min, "grid.lambda_max": lambda_max, "grid.s_values": s_values},
    )
    sim = cfg.simulation
    spec = ScenarioSpec(sim.scenario, n_total=sim.n_total, n_train=sim.n_train, seed=cfg.seed, replicates=sim.replicates)
    grid = cfg.grid.build(spec.n_train)
    plan = SimulationPlan(
        methods=[SimMethod(m) for m in sim.methods],
        criterion=SelectionCriterion.parse(sim.criterion, k=cfg.cv_folds, seed=cfg.seed),
        lambdas=grid.lambdas,
        s_values=grid.s_values,
        fit_config=cfg.solver.build(PenaltyParams(s=1.0)),
    )
    rows = run_simulation(spec, plan)
    _emit(_csv(rows_to_frame(rows)), out, f"simulation_scenario{spec.id.value}.csv", cfg)
    if summary is not None:
        _emit(_csv(summarize(rows)), summary, None, cfg)


@cli.command(name="threshold-curve")
@click.option("--lambda", "lam", type=float, default=1.0, show_default=True, help="Penalty weight.")
@click.option("--s", "s", type=float, default=0.01, show_default=True, help="Shape parameter.")
@click.option("--ymin", type=float, default=-5.0, show_default=True)
@click.option("--ymax", type=float, default=5.0, show_default=True)
@click.option("--step", type=float, default=0.01, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="CSV output file.")
def threshold_curve_command(lam, s, ymin, ymax, step, out):
    """Scalar dlasso estimate as a function of the observation y."""
    if not step > 0 or ymax < ymin:
        raise click.UsageError("need step > 0 and ymin <= ymax")
    params = PenaltyParams(s=s, lam=lam)
    num = int(round((ymax - ymin) / step)) + 1
    ys = np.linspace(ymin, ymin + (num - 1) * step, num)
    frame = pd.DataFrame({"y": ys, "estimate": threshold_curve(ys, params)})
    _emit(_csv(frame), out, "threshold_curve.csv")


@cli.command(name="bench-erf")
@click.option("--repeats", type=int, default=20, show_default=True, help="Timing repetitions per kernel.")
@click.option("--no-timing", is_flag=True, help="Drop the wall-clock column.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="CSV output file.")
def bench_erf_command(repeats, no_timing, out):
    """Accuracy (and speed) of every erf kernel."""
    _emit(_csv(bench_erf(repeats=repeats, timing=not no_timing)), out, "bench_erf.csv")


@cli.command(name="bench-penalty")
@click.option("--s-values", callback=_float_list, default="0.01,0.1,0.5,1", show_default=True)
@click.option("--xmin", type=float, default=-3.0, show_default=True)
@click.option("--xmax", type=float, default=3.0, show_default=True)
@click.option("--num", type=int, default=601, show_default=True)
@click.option("--gaps", type=click.Path(dir_okay=False, path_type=Path), help="CSV of the largest gap to |x| per s.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="CSV output file.")
def bench_penalty_command(s_values, xmin, xmax, num, gaps, out):
    """|x|, its smooth approximations and x^2 on a grid."""
    if num < 2 or xmax <= xmin:
        raise click.UsageError("need num >= 2 and xmin < xmax")
    curves = penalty_curves(np.linspace(xmin, xmax, num), s_values)
    _emit(_csv(curves), out, "penalty_curves.csv")
    if gaps is not None or _output_dir() is not None:
        _emit(_csv(penalty_gaps(curves)), gaps, "penalty_gaps.csv")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit status."""
    try:
        status = cli.main(args=list(argv) if argv is not None else None, prog_name="dlasso", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return status if isinstance(status, int) else 0
