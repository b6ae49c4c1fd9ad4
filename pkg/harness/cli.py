import functools
from pathlib import Path

import click
import numpy as np
from scipy import linalg

from pagof_main import __version__
from helper.exceptions import DegenerateSampleError, NumericalError, PagofError
from helper.logger_setup import setup_logger
from helper.responses import fail, ok
from funcdata.generators import GENERATORS
from funcdata.io import read_response_csv, read_sample_csv, write_curve_csv, write_response_csv, write_sample_csv
from gflm.estimator import fit_gflm
from bootstrap.procedures import run_gof_test
from harness.models import ExperimentConfig, normalize_p_mode
from harness.runner import run_experiment

logger = setup_logger('cli')

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NUMERICAL_ERRORS = (NumericalError, DegenerateSampleError, linalg.LinAlgError, FloatingPointError)
INPUT_ERRORS = (PagofError, ValueError, OSError)
EXAMPLE_FAMILIES = {"example1": "gaussian", "example2": "bernoulli"}


def reported(command):
    """Map library errors to a JSON failure payload and the documented exit codes."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            code = command(*args, **kwargs)
        except NUMERICAL_ERRORS as error:
            logger.error(f"{command.__name__} failed numerically: {error}")
            code = fail(str(error), {"type": type(error).__name__}, exit_code=EXIT_NUMERICAL)
        except INPUT_ERRORS as error:
            logger.error(f"{command.__name__} rejected its input: {error}")
            code = fail(str(error), {"type": type(error).__name__}, exit_code=EXIT_CONFIG)
        click.get_current_context().exit(code)
    return wrapper


def _p_mode(ctx, param, value):
    if value is None:
        return None
    try:
        return normalize_p_mode(value)
    except PagofError as error:
        raise click.BadParameter(str(error)) from None


def _lambda(ctx, param, value):
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise click.BadParameter(f"expected a number or 'auto', got {value!r}") from None


example_option = click.option("--example", type=click.Choice(sorted(GENERATORS)), default="example1",
                              show_default=True)
seed_option = click.option("--seed", type=click.IntRange(min=0), default=None, help="Master seed.")


@click.group()
@click.version_option(__version__, prog_name="pagof")
def cli():
    """Projection-averaging goodness-of-fit test for functional GLMs."""


@cli.command()
@example_option
@click.option("--n", "n", type=int, default=100, show_default=True)
@click.option("--a", "a", type=float, default=0.0, show_default=True, help="Deviation from the null model.")
@seed_option
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@reported
def simulate(example, n, a, seed, out):
    """Draw a data set and write curves.csv, response.csv and beta.csv."""
    data = GENERATORS[example](n, a, np.random.default_rng(seed))
    out = Path(out)
    curves = write_sample_csv(data.sample, out / "curves.csv")
    response = write_response_csv(data.response, out / "response.csv")
    beta = write_curve_csv(data.beta, out / "beta.csv")
    return ok("Data simulated", {"example": example, "n": n, "a": a, "seed": seed,
                                 "files": [str(curves), str(response), str(beta)]})


@cli.command()
@click.option("--curves", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--response", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--family", type=click.Choice(["gaussian", "bernoulli", "poisson"]), default="gaussian",
              show_default=True)
@click.option("--lambda", "lam", default="auto", callback=_lambda, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Fit summary JSON.")
@reported
def fit(curves, response, family, lam, out):
    """Fit a penalized GFLM to CSV data."""
    sample = read_sample_csv(curves)
    model = fit_gflm(sample, read_response_csv(response, family), family, lam=lam)
    model.to_json(out)
    return ok("Model fitted", {"family": model.family, "alpha": model.alpha, "lambda": model.lam,
                               "converged": model.converged, "edf": model.edf, "out": str(out)})


@cli.command()
@click.option("--curves", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--response", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--family", type=click.Choice(["gaussian", "bernoulli", "poisson"]), default=None)
@example_option
@click.option("--n", "n", type=int, default=100, show_default=True)
@click.option("--a", "a", type=float, default=0.0, show_default=True)
@seed_option
@click.option("--bootstrap-B", "B", type=int, default=None, help="Bootstrap replicates.")
@click.option("--alpha", type=float, default=None)
@click.option("--p-mode", default="auto", callback=_p_mode, show_default=True, help="auto or fixed:<k>.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Optional result JSON.")
@reported
def test(curves, response, family, example, n, a, seed, B, alpha, p_mode, out):
    """Run one goodness-of-fit test on CSV data, or on a fresh draw when no files are given."""
    rng = np.random.default_rng(seed)
    if (curves is None) != (response is None):
        raise click.UsageError("--curves and --response must be given together")
    if curves is None:
        data = GENERATORS[example](n, a, rng)
        sample, observed = data.sample, data.response
    else:
        family = family or "gaussian"
        sample, observed = read_sample_csv(curves), read_response_csv(response, family)
    _, result = run_gof_test(sample, observed, family, B=B, alpha=alpha, p_mode=p_mode, rng=rng)
    if out is not None:
        result.to_json(out)
    summary = result.to_dict(include_boot_stats=False)
    summary["decision"] = "reject" if result.reject else "retain"
    return ok("Goodness-of-fit test finished", summary)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True,
              help="Experiment config JSON.")
@seed_option
@click.option("--reps", type=click.IntRange(min=1), default=None)
@click.option("--bootstrap-B", "B", type=int, default=None)
@click.option("--p-mode", default=None, callback=_p_mode, help="Replace the configured p modes.")
@click.option("--n-jobs", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output path without suffix.")
@reported
def experiment(config_path, seed, reps, B, p_mode, n_jobs, out):
    """Run a Monte Carlo size/power study and write CSV and JSON reports."""
    config = ExperimentConfig.from_json(config_path).with_overrides(
        seed=seed, reps=reps, B=B, p_modes=None if p_mode is None else (p_mode,),
        n_jobs=n_jobs, output_path=out)
    report = run_experiment(config)
    return ok("Experiment finished", {
        "csv": str(Path(config.output_path).with_suffix(".csv")),
        "json": str(Path(config.output_path).with_suffix(".json")),
        "cells": len(report.cells),
        "invalid_cells": sum(not cell.valid for cell in report.cells),
        "elapsed_seconds": report.elapsed_seconds,
    })


def main(argv: list[str] | None = None) -> int:
    try:
        code = cli.main(args=argv, prog_name="pagof", standalone_mode=False)
    except click.ClickException as error:
        return fail(error.format_message(), {"type": type(error).__name__}, exit_code=EXIT_CONFIG)
    except click.Abort:
        return fail("Aborted", exit_code=1)
    return 0 if code is None else int(code)
