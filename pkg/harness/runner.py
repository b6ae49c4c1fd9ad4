"""
Monte Carlo runner for the size and power studies.

Cells are the (n, a) pairs of a config; every replication of a cell draws a
fresh data set, fits the null model, runs one bootstrap shared by all p modes
and records the p-values. Rejections at each alpha are read off those
p-values. Replication r of cell c always uses the stream keyed on
(seed, c, r), so the report does not depend on scheduling.
"""

import time
from datetime import datetime, timezone
from itertools import product

import joblib
import numpy as np
from scipy import linalg

from pagof_main import __version__, settings
from helper.exceptions import PagofError
from helper.logger_setup import setup_logger
from helper.random_streams import cell_generator
from funcdata.generators import GENERATORS
from gflm.estimator import fit_gflm
from bootstrap.procedures import bootstrap_statistics, scheme_for
from harness.models import CellResult, ExperimentConfig, ExperimentReport

logger = setup_logger('harness')

REPLICATION_ERRORS = (PagofError, linalg.LinAlgError, FloatingPointError)


def run_replication(config: ExperimentConfig, cell: int, n: int, a: float, replication: int) -> dict | None:
    """p-value per p mode for one simulated data set, or None when the replication failed."""
    rng = cell_generator(config.seed, cell, replication)
    try:
        data = GENERATORS[config.example](n, a, rng)
        fit = fit_gflm(data.sample, data.response, config.family)
        draws = bootstrap_statistics(data.sample, fit, config.family, scheme_for(config.family),
                                     config.B, config.p_modes, rng, n_jobs=1)
    except REPLICATION_ERRORS as error:
        logger.warning(f"{config.example} n={n} a={a} replication {replication} failed: {error}")
        return None
    return {mode: draws.result(mode).p_value for mode in config.p_modes}


def _summarize(config: ExperimentConfig, n: int, a: float, outcomes: list) -> list[CellResult]:
    succeeded = [outcome for outcome in outcomes if outcome is not None]
    n_failed = len(outcomes) - len(succeeded)
    valid = n_failed <= settings.MAX_FAILURE_FRACTION * config.reps
    if not valid:
        logger.warning(f"{config.example} n={n} a={a}: {n_failed}/{config.reps} replications failed; "
                       f"cell marked invalid")
    cells = []
    for alpha, mode in product(config.alpha_list, config.p_modes):
        p_values = np.array([outcome[mode] for outcome in succeeded])
        cells.append(CellResult(config.example, n, a, alpha, mode, int(np.sum(p_values < alpha)),
                                config.reps, len(succeeded), n_failed, valid, tuple(p_values.tolist())))
    return cells


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentReport:
    n_jobs = settings.N_JOBS if config.n_jobs is None else config.n_jobs
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    clock = time.perf_counter()
    logger.info(f"experiment {config.example}: n={list(config.n_list)}, a={list(config.a_list)}, "
                f"reps={config.reps}, B={config.B}, p modes={list(config.p_modes)}, seed={config.seed}")

    cells = []
    for cell, (n, a) in enumerate(product(config.n_list, config.a_list)):
        outcomes = joblib.Parallel(n_jobs=n_jobs)(
            joblib.delayed(run_replication)(config, cell, n, a, replication)
            for replication in range(config.reps)
        )
        summary = _summarize(config, n, a, outcomes)
        cells.extend(summary)
        rates = {(c.alpha, c.p_mode): round(c.rate, 3) for c in summary}
        logger.info(f"{config.example} n={n} a={a}: rejection rates {rates}")

    report = ExperimentReport(config, tuple(cells), started_at, time.perf_counter() - clock, __version__)
    if write:
        csv_path, json_path = report.write()
        logger.info(f"experiment report written to {csv_path} and {json_path}")
    return report
