"""
Bootstrap calibration of T_n.

Both schemes hold the curves, the FPCA basis, p and the smoothing parameter
fixed, regenerate the response from the fitted null model, refit, and
recompute T_n* with the angle kernel built once from the original scores.

Exterior angles of a triangle sum to 2 pi, so the kernel has a constant
off-diagonal mean and, with residuals summing to zero, T_n carries a term
proportional to -||e||^2. Refitting shrinks ||e*||^2 and the two-point
weights make it fluctuate, so by default every replicate is evaluated at its
residuals rescaled to the observed norm ||e||. T_n(c e) = c^2 T_n(e), so this
is T_n* ||e||^2 / ||e*||^2.
"""

import warnings
from dataclasses import dataclass, field

import joblib
import numpy as np
from scipy import linalg

from pagof_main import settings
from helper.exceptions import (BootstrapAbortError, ClampWarning, ConvergenceWarning, DimensionError,
                               NumericalError, SeparationWarning, UnsupportedFamilyError)
from helper.logger_setup import setup_logger
from helper.random_streams import RandomSource, as_generator, spawn_generators
from funcdata.models import FunctionalSample, ScalarResponse
from fpca.decomposition import fit_fpca, resolve_p
from fpca.models import FpcaBasis
from gflm.estimator import PenalizedDesign, fit_gflm, refit
from gflm.families import Family, get_family
from gflm.models import GflmFit
from gof.statistic import angle_kernel_matrix, tn_from_kernel
from bootstrap.models import BINARY, WILD, GofResult
from bootstrap.weights import wild_weights

logger = setup_logger('bootstrap')

MIN_REPLICATES = 100
REPLICATE_ERRORS = (NumericalError, linalg.LinAlgError, FloatingPointError)
SCHEME_FAMILIES = {WILD: "gaussian-identity", BINARY: "bernoulli-logit"}


@dataclass(frozen=True, eq=False)
class BootstrapDraws:
    """Observed and replicate statistics for every requested p mode, sharing one set of replicates."""
    scheme: str
    t_n: dict
    boot_stats: dict
    p: dict
    seed: int | None = None
    redraws: int = 0
    exact_fit: bool = False
    modes: tuple = field(default=())

    def result(self, p_mode="auto", alpha: float | None = None) -> GofResult:
        alpha = settings.ALPHA if alpha is None else alpha
        key = str(p_mode)
        return GofResult.from_draws(self.t_n[key], self.boot_stats[key], alpha, self.scheme,
                                    self.seed, self.p[key], key, self.redraws)


def _seed_of(rng: RandomSource) -> int | None:
    return int(rng) if isinstance(rng, (int, np.integer)) else None


def _check_inputs(sample: FunctionalSample, fit: GflmFit, family: Family, scheme: str, B: int) -> None:
    if B < MIN_REPLICATES:
        raise ValueError(f"at least {MIN_REPLICATES} bootstrap replicates are required, got B={B}")
    if fit.n != sample.n:
        raise DimensionError(f"fit has {fit.n} observations, sample has {sample.n}")
    expected = SCHEME_FAMILIES[scheme]
    if family.kind != expected:
        raise UnsupportedFamilyError(f"the {scheme} bootstrap needs a {expected} model, got {family.kind}")
    if fit.family != family.kind:
        raise UnsupportedFamilyError(f"fit was made with {fit.family}, not {family.kind}")


def clamp_probabilities(fitted: np.ndarray) -> np.ndarray:
    bound = settings.PROBABILITY_CLAMP
    clamped = np.clip(fitted, bound, 1 - bound)
    changed = int(np.sum(clamped != fitted))
    if changed:
        message = f"{changed} fitted probabilities clamped to [{bound:.12g}, {1 - bound:.12g}]"
        logger.warning(message)
        warnings.warn(message, ClampWarning, stacklevel=3)
    return clamped


def _draw_response(scheme: str, fit: GflmFit, probabilities: np.ndarray | None,
                   rng: np.random.Generator) -> np.ndarray:
    if scheme == WILD:
        return fit.fitted + fit.residuals * wild_weights(fit.n, rng)
    # fitted probabilities resampled without replacement
    shuffled = rng.permutation(probabilities)
    return (rng.uniform(size=shuffled.size) < shuffled).astype(float)


def norm_matched_residuals(residuals: np.ndarray, target: float) -> np.ndarray:
    """Scale residuals to squared norm target."""
    norm2 = float(residuals @ residuals)
    if not norm2 > 0:
        raise NumericalError("bootstrap residuals vanish; cannot match the observed norm")
    return residuals * np.sqrt(target / norm2)


def _replicate(index: int, scheme: str, design: PenalizedDesign, fit: GflmFit, family: Family,
               probabilities: np.ndarray | None, kernels: list, rng: np.random.Generator,
               target: float | None = None):
    failure = None
    for attempt in range(2):
        y = _draw_response(scheme, fit, probabilities, rng)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                warnings.simplefilter("ignore", SeparationWarning)
                star = refit(fit, design, y, family)
            if star.separated or not star.converged:
                raise NumericalError(f"refit stopped after {star.iterations} iterations "
                                     f"(separated={star.separated})")
            residuals = star.residuals if target is None else norm_matched_residuals(star.residuals, target)
            stats = np.array([tn_from_kernel(kernel, residuals) for kernel in kernels])
            if not np.all(np.isfinite(stats)):
                raise NumericalError("non-finite bootstrap statistic")
            return stats, attempt
        except REPLICATE_ERRORS as error:
            failure = error
            logger.warning(f"bootstrap replicate {index} attempt {attempt + 1} failed: {error}")
    raise BootstrapAbortError(
        f"bootstrap replicate {index} failed twice in a row: {failure}", replicate=index,
        diagnostics={"scheme": scheme, "lambda": fit.lam, "error": str(failure)})


def _replicate_batch(indices, streams, scheme, design, fit, family, probabilities, kernels, target):
    return [_replicate(index, scheme, design, fit, family, probabilities, kernels, stream, target)
            for index, stream in zip(indices, streams)]


def bootstrap_statistics(sample: FunctionalSample, fit: GflmFit, family: "str | Family", scheme: str,
                         B: int | None = None, p_modes=("auto",), rng: RandomSource = None,
                         n_jobs: int | None = None, basis: FpcaBasis | None = None,
                         norm_matched: bool | None = None) -> BootstrapDraws:
    """
    Run one set of B replicates and evaluate T_n* for every p mode on it.
    Replicate b always uses the b-th child stream of rng, so the draws do not
    depend on n_jobs. With norm_matched off the replicates are the raw T_n*.
    """
    family = get_family(family)
    B = settings.BOOTSTRAP_REPLICATES if B is None else int(B)
    n_jobs = settings.N_JOBS if n_jobs is None else n_jobs
    norm_matched = settings.NORM_MATCHED if norm_matched is None else norm_matched
    _check_inputs(sample, fit, family, scheme, B)
    seed = _seed_of(rng)
    rng = as_generator(rng)

    if basis is None:
        basis = fit_fpca(sample)
    modes = tuple(str(mode) for mode in p_modes)
    p = {mode: resolve_p(basis, mode) for mode in modes}
    kernel_by_p = {dimension: angle_kernel_matrix(basis.truncate(dimension).scores, n_jobs=n_jobs)
                   for dimension in sorted(set(p.values()))}
    kernels = [kernel_by_p[p[mode]] for mode in modes]

    if np.max(np.abs(fit.residuals)) <= settings.EXACT_FIT_TOL:
        logger.warning(f"residuals vanish (max |e| <= {settings.EXACT_FIT_TOL:g}); "
                       f"every bootstrap statistic is 0 and the test cannot reject")
        zeros = np.zeros(B)
        return BootstrapDraws(scheme, {mode: 0.0 for mode in modes}, {mode: zeros for mode in modes},
                              p, seed, 0, True, modes)

    t_n = {mode: tn_from_kernel(kernel, fit.residuals) for mode, kernel in zip(modes, kernels)}
    probabilities = clamp_probabilities(fit.fitted) if scheme == BINARY else None
    design = PenalizedDesign.build(sample, fit.beta_coefs.size, fit.penalty_order)
    target = float(fit.residuals @ fit.residuals) if norm_matched else None

    streams = spawn_generators(rng, B)
    batches = np.array_split(np.arange(B), min(B, 4 * joblib.effective_n_jobs(n_jobs)))
    outcomes = joblib.Parallel(n_jobs=n_jobs)(
        joblib.delayed(_replicate_batch)(batch, [streams[b] for b in batch], scheme, design, fit,
                                         family, probabilities, kernels, target)
        for batch in batches
    )
    replicates = [item for outcome in outcomes for item in outcome]
    stats = np.vstack([item[0] for item in replicates])
    redraws = int(sum(item[1] for item in replicates))
    logger.info(f"{scheme} bootstrap: B={B}, n={sample.n}, p={p}, redraws={redraws}, "
                f"norm_matched={norm_matched}, T_n={t_n}")
    return BootstrapDraws(scheme, t_n, {mode: stats[:, column] for column, mode in enumerate(modes)},
                          p, seed, redraws, False, modes)


def wild_bootstrap_test(sample: FunctionalSample, response: ScalarResponse, fit: GflmFit,
                        family: "str | Family" = "gaussian", B: int | None = None, alpha: float | None = None,
                        p_mode="auto", rng: RandomSource = None, n_jobs: int | None = None,
                        basis: FpcaBasis | None = None) -> GofResult:
    """Residual wild bootstrap with two-point weights for a continuous response."""
    _check_response(sample, response)
    draws = bootstrap_statistics(sample, fit, family, WILD, B, (p_mode,), rng, n_jobs, basis)
    return draws.result(p_mode, alpha)


def binary_bootstrap_test(sample: FunctionalSample, response: ScalarResponse, fit: GflmFit,
                          family: "str | Family" = "bernoulli", B: int | None = None, alpha: float | None = None,
                          p_mode="auto", rng: RandomSource = None, n_jobs: int | None = None,
                          basis: FpcaBasis | None = None) -> GofResult:
    """Model-based bootstrap drawing Y* from permuted fitted probabilities."""
    _check_response(sample, response)
    draws = bootstrap_statistics(sample, fit, family, BINARY, B, (p_mode,), rng, n_jobs, basis)
    return draws.result(p_mode, alpha)


def _check_response(sample: FunctionalSample, response: ScalarResponse) -> None:
    if len(response) != sample.n:
        raise DimensionError(f"{len(response)} responses for {sample.n} curves")


SCHEME_BY_FAMILY = {"gaussian-identity": WILD, "bernoulli-logit": BINARY}


def scheme_for(family: "str | Family") -> str:
    kind = get_family(family).kind
    if kind not in SCHEME_BY_FAMILY:
        raise UnsupportedFamilyError(f"no calibrated bootstrap for the {kind} family")
    return SCHEME_BY_FAMILY[kind]


def run_gof_test(sample: FunctionalSample, response: ScalarResponse, family: "str | Family | None" = None,
                 B: int | None = None, alpha: float | None = None, p_mode="auto", rng: RandomSource = None,
                 lam="auto", n_jobs: int | None = None) -> tuple[GflmFit, GofResult]:
    """Fit the null model and calibrate T_n with the scheme matching its family."""
    family = get_family(response.family if family is None else family)
    scheme = scheme_for(family)
    fit = fit_gflm(sample, response, family, lam=lam)
    test = wild_bootstrap_test if scheme == WILD else binary_bootstrap_test
    return fit, test(sample, response, fit, family, B, alpha, p_mode, rng, n_jobs)
