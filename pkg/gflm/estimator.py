"""
Penalized maximum likelihood for the generalized functional linear model

    max_{alpha, beta}  n^-1 sum_i l(Y_i; alpha + <X_i, beta>) - lam / 2 J(beta, beta)

with beta in a cubic B-spline span and J the integrated squared m-th
derivative. The maximizer is found by penalized IRLS with step halving;
lam is either given or chosen on a log-spaced grid, by UBRE for families
with a known scale and by GCV otherwise. Candidates whose fit did not
converge, ran off to separation or pins a fitted mean to the boundary of
the support are not eligible.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from pagof_main import settings
from helper.exceptions import ConvergenceWarning, DimensionError, SeparationWarning, UnsupportedFamilyError
from helper.logger_setup import setup_logger
from funcdata.models import Curve, FunctionalSample, Grid, ScalarResponse
from gflm.families import Family, GaussianIdentity, get_family
from gflm.models import GflmFit
from gflm.splines import bspline_design, bspline_knots, penalty_matrix

logger = setup_logger('gflm')

EPS = np.finfo(float).eps
WEIGHT_FLOOR = np.sqrt(EPS)


@dataclass(frozen=True, eq=False)
class PenalizedDesign:
    """Basis-expanded design [1, <X_i, B_1>, ..., <X_i, B_K>] and padded penalty."""
    grid: Grid
    knots: np.ndarray
    degree: int
    penalty_order: int
    basis_on_grid: np.ndarray
    design: np.ndarray
    penalty: np.ndarray

    @classmethod
    def build(cls, sample: FunctionalSample, basis_size: int | None = None,
              penalty_order: int | None = None, degree: int | None = None) -> "PenalizedDesign":
        basis_size = settings.BASIS_SIZE if basis_size is None else basis_size
        penalty_order = settings.PENALTY_ORDER if penalty_order is None else penalty_order
        degree = settings.SPLINE_DEGREE if degree is None else degree
        if penalty_order < 1:
            raise ValueError(f"penalty order must be at least 1, got {penalty_order}")
        if penalty_order > degree:
            raise ValueError(f"penalty order {penalty_order} exceeds the spline degree {degree}; "
                             f"the penalty would vanish")
        knots = bspline_knots(sample.grid.points, basis_size, degree)
        basis_on_grid = bspline_design(sample.grid.points, knots, degree)
        design = np.column_stack([np.ones(sample.n), sample.inner_products(basis_on_grid.T)])
        penalty = np.zeros((basis_size + 1, basis_size + 1))
        penalty[1:, 1:] = penalty_matrix(knots, degree, penalty_order)
        return cls(sample.grid, knots, degree, penalty_order, basis_on_grid, design, penalty)

    @property
    def n(self) -> int:
        return self.design.shape[0]

    def slope_curve(self, coefs: np.ndarray) -> Curve:
        return Curve(self.grid, self.basis_on_grid @ coefs)

    def lambda_scale(self, weights: np.ndarray) -> float:
        """lam at which n lam tr(P) matches tr(Z' W Z)."""
        information = np.sum(weights[:, None] * self.design ** 2)
        penalty_trace = np.trace(self.penalty)
        if penalty_trace <= 0:
            raise ValueError("penalty matrix has zero trace; no lambda scale can be derived")
        return float(information / (self.n * penalty_trace))

    def lambda_grid(self, weights: np.ndarray, size: int | None = None,
                    low: float | None = None, high: float | None = None) -> np.ndarray:
        size = settings.LAMBDA_GRID_SIZE if size is None else size
        low = settings.LAMBDA_GRID_MIN if low is None else low
        high = settings.LAMBDA_GRID_MAX if high is None else high
        return self.lambda_scale(weights) * np.logspace(np.log10(low), np.log10(high), size)


@dataclass
class _IrlsState:
    coefs: np.ndarray
    eta: np.ndarray
    weights: np.ndarray
    working: np.ndarray
    objective: float
    converged: bool
    iterations: int
    separated: bool
    gradient_norm: float


def _solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return linalg.solve(lhs, rhs, assume_a='pos')
    except (linalg.LinAlgError, ValueError):
        return linalg.lstsq(lhs, rhs)[0]


def _objective(design, penalty, y, family, coefs, lam):
    eta = design.design @ coefs
    return np.mean(family.loglik(y, eta)) - lam / 2 * coefs @ penalty @ coefs


def _working_quantities(design, y, family, coefs):
    eta = design.design @ coefs
    weights = np.maximum(family.weight(eta), WEIGHT_FLOOR)
    working = eta + family.score(y, eta) / weights
    return eta, weights, working


def _initial_coefs(design: PenalizedDesign, y: np.ndarray, family: Family) -> np.ndarray:
    coefs = np.zeros(design.design.shape[1])
    coefs[0] = float(family.link_function(family.starting_mean(y)))
    return coefs


def penalized_irls(design: PenalizedDesign, y: np.ndarray, family: Family, lam: float,
                   start: np.ndarray | None = None, max_iter: int | None = None,
                   tol: float | None = None, max_halvings: int | None = None) -> _IrlsState:
    max_iter = settings.IRLS_MAX_ITER if max_iter is None else max_iter
    tol = settings.IRLS_TOL if tol is None else tol
    max_halvings = settings.IRLS_MAX_HALVINGS if max_halvings is None else max_halvings
    n = design.n
    penalty = design.penalty
    scaled_penalty = n * lam * penalty

    coefs = _initial_coefs(design, y, family) if start is None else np.array(start, dtype=float)
    objective = _objective(design, penalty, y, family, coefs, lam)
    converged = separated = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        _, weights, working = _working_quantities(design, y, family, coefs)
        weighted = design.design * weights[:, None]
        proposal = _solve(design.design.T @ weighted + scaled_penalty, weighted.T @ working)

        candidate = _objective(design, penalty, y, family, proposal, lam)
        halvings = 0
        while (not np.isfinite(candidate) or candidate < objective - 1e-12 * abs(objective)) \
                and halvings < max_halvings:
            proposal = (coefs + proposal) / 2
            candidate = _objective(design, penalty, y, family, proposal, lam)
            halvings += 1

        change = np.linalg.norm(proposal - coefs) / max(np.linalg.norm(proposal), 1e-12)
        logger.debug(f"irls iteration {iteration}: objective={candidate:.10g}, change={change:.3e}, halvings={halvings}")
        coefs, objective = proposal, candidate

        if np.linalg.norm(coefs) > settings.SEPARATION_BOUND:
            separated = True
            break
        if change < tol:
            converged = True
            break

    eta, weights, working = _working_quantities(design, y, family, coefs)
    gradient = design.design.T @ family.score(y, eta) / n - lam * penalty @ coefs
    return _IrlsState(coefs, eta, weights, working, objective, converged, iteration,
                      separated, float(np.linalg.norm(gradient)))


def _hat_trace(design: PenalizedDesign, weights: np.ndarray, lam: float) -> float:
    information = design.design.T @ (design.design * weights[:, None])
    lhs = information + design.n * lam * design.penalty
    return float(np.trace(_solve(lhs, information)))


def _gcv(design: PenalizedDesign, state: _IrlsState, lam: float) -> tuple[float, float, float]:
    n = design.n
    edf = _hat_trace(design, state.weights, lam)
    rss = float(np.sum(state.weights * (state.working - state.eta) ** 2))
    if edf >= n:
        return np.inf, edf, rss
    return n * rss / (n - edf) ** 2, edf, rss


def _ubre(design: PenalizedDesign, state: _IrlsState, y: np.ndarray, family: Family,
          lam: float) -> float:
    n = design.n
    edf = _hat_trace(design, state.weights, lam)
    deviance = float(np.sum(family.deviance(y, state.eta)))
    scale = family.dispersion
    return deviance / n - scale + 2 * edf * scale / n


def _gcv_deviance(design: PenalizedDesign, state: _IrlsState, y: np.ndarray, family: Family,
                  lam: float) -> float:
    n = design.n
    edf = _hat_trace(design, state.weights, lam)
    if edf >= n:
        return np.inf
    deviance = float(np.sum(family.deviance(y, state.eta)))
    return n * deviance / (n - edf) ** 2


def smoothing_criterion(family: Family) -> str:
    return "ubre" if family.known_scale else "gcv"


def _criterion_score(design, state, y, family, lam) -> float:
    if family.known_scale:
        return _ubre(design, state, y, family, lam)
    return _gcv_deviance(design, state, y, family, lam)


def _eligible(state: _IrlsState, family: Family) -> bool:
    if state.separated or not state.converged:
        return False
    return not np.any(family.saturated(state.eta, settings.SATURATION_TOL))


def gcv_score(design: PenalizedDesign, response: ScalarResponse | np.ndarray, family: "str | Family",
              lam: float, start: np.ndarray | None = None) -> float:
    """GCV(lam) = n RSS_w / (n - tr H_lam)^2 at the converged IRLS weights."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    family = get_family(family)
    y = response.values if isinstance(response, ScalarResponse) else np.asarray(response, dtype=float)
    state = penalized_irls(design, y, family, lam, start=start)
    return _gcv(design, state, lam)[0]


def ubre_score(design: PenalizedDesign, response: ScalarResponse | np.ndarray, family: "str | Family",
               lam: float, start: np.ndarray | None = None) -> float:
    """UBRE(lam) = D/n - s + 2 s tr H_lam / n for a family with known scale s."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    family = get_family(family)
    y = response.values if isinstance(response, ScalarResponse) else np.asarray(response, dtype=float)
    state = penalized_irls(design, y, family, lam, start=start)
    return _ubre(design, state, y, family, lam)


def _check_response(response: ScalarResponse, family: Family, n: int) -> np.ndarray:
    if len(response) != n:
        raise DimensionError(f"{len(response)} responses for {n} curves")
    if response.family != family.name:
        ScalarResponse(response.values, family.name)
    return response.values


def fit_gflm(sample: FunctionalSample, response: ScalarResponse, family: "str | Family | None" = None,
             lam: "float | str" = "auto", basis_size: int | None = None,
             penalty_order: int | None = None, design: PenalizedDesign | None = None,
             start: np.ndarray | None = None) -> GflmFit:
    family = get_family(response.family if family is None else family)
    y = _check_response(response, family, sample.n)
    if design is None:
        design = PenalizedDesign.build(sample, basis_size, penalty_order)

    lambda_path = {}
    criterion = smoothing_criterion(family)
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lambda must be a nonnegative number or 'auto', got {lam!r}")
        lam, state = _select_lambda(design, y, family, start, lambda_path)
        logger.info(f"{criterion.upper()} selected lambda={lam:.4g} for {family.kind} (n={sample.n})")
    else:
        if lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {lam}")
        state = penalized_irls(design, y, family, float(lam), start=start)

    return _build_fit(design, y, family, float(lam), state, lambda_path)


def _select_lambda(design: PenalizedDesign, y: np.ndarray, family: Family, start: np.ndarray | None,
                   lambda_path: dict) -> tuple[float, _IrlsState]:
    start_coefs = _initial_coefs(design, y, family) if start is None else start
    _, weights, _ = _working_quantities(design, y, family, start_coefs)
    best = fallback = None
    for candidate_lam in design.lambda_grid(weights):
        state = penalized_irls(design, y, family, candidate_lam, start=start)
        score = _criterion_score(design, state, y, family, candidate_lam)
        lambda_path[float(candidate_lam)] = float(score)
        fallback = (candidate_lam, state)
        if not _eligible(state, family):
            logger.debug(f"lambda={candidate_lam:.4g} skipped: converged={state.converged}, "
                         f"separated={state.separated}")
            continue
        if best is None or score < best[1]:
            best = (candidate_lam, score, state)
    if best is None:
        # largest grid value is the most regularized fit available
        logger.warning(f"no eligible lambda on the grid for {family.kind}; using lambda={fallback[0]:.4g}")
        return float(fallback[0]), fallback[1]
    return float(best[0]), best[2]


def refit(fit: GflmFit, design: PenalizedDesign, y: np.ndarray, family: "str | Family") -> GflmFit:
    """Refit on a new response with the design and lambda of an earlier fit."""
    family = get_family(family)
    state = penalized_irls(design, np.asarray(y, dtype=float), family, fit.lam, start=fit.coefficients)
    return _build_fit(design, np.asarray(y, dtype=float), family, fit.lam, state, {}, quiet=True)


def _build_fit(design, y, family, lam, state, lambda_path, quiet=False) -> GflmFit:
    gcv, edf, rss_weighted = _gcv(design, state, lam)
    criterion_score = _criterion_score(design, state, y, family, lam)
    fitted = family.mean(state.eta)
    residuals = y - fitted
    if isinstance(family, GaussianIdentity):
        dispersion = float(residuals @ residuals / (design.n - edf)) if edf < design.n else np.nan
    else:
        dispersion = family.dispersion
    slope = state.coefs[1:]
    if state.separated:
        message = f"coefficient norm exceeded {settings.SEPARATION_BOUND:g}; likely perfect separation"
        logger.warning(message)
        warnings.warn(message, SeparationWarning, stacklevel=3)
    elif not state.converged:
        message = f"IRLS did not converge in {state.iterations} iterations (lambda={lam:.4g})"
        logger.warning(message)
        warnings.warn(message, ConvergenceWarning, stacklevel=3)
    elif not quiet:
        logger.info(f"{family.kind} fit converged in {state.iterations} iterations, "
                    f"lambda={lam:.4g}, edf={edf:.2f}, gradient norm={state.gradient_norm:.2e}")
    return GflmFit(
        family=family.kind,
        alpha=float(state.coefs[0]),
        beta_coefs=slope,
        beta_curve=design.slope_curve(slope),
        lam=lam,
        penalty_order=design.penalty_order,
        eta=state.eta,
        fitted=fitted,
        residuals=residuals,
        converged=state.converged,
        iterations=state.iterations,
        edf=edf,
        rss_weighted=rss_weighted,
        gcv=gcv,
        criterion=smoothing_criterion(family),
        criterion_score=criterion_score,
        dispersion=dispersion,
        roughness=float(state.coefs @ design.penalty @ state.coefs),
        separated=state.separated,
        gradient_norm=state.gradient_norm,
        lambda_path=lambda_path,
    )


def score_residual(fit: GflmFit, family: "str | Family | None" = None) -> np.ndarray:
    """epsilon_i = l'_a(Y_i; alpha + <X_i, beta>), i.e. (Y_i - F(eta_i)) / a(phi)."""
    family = get_family(fit.family if family is None else family)
    if family.kind != fit.family:
        raise UnsupportedFamilyError(f"fit was made with {fit.family}, not {family.kind}")
    y = fit.fitted + fit.residuals
    return family.score(y, fit.eta)


def linear_predictor(fit: GflmFit, sample: FunctionalSample) -> np.ndarray:
    return fit.alpha + sample.inner_products(fit.beta_curve)
