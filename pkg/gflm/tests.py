import json

import numpy as np
import pytest
from scipy.special import expit

from pagof_main import settings
from helper.exceptions import ConvergenceWarning, DimensionError, SeparationWarning, UnsupportedFamilyError
from funcdata.generators import gen_example1, gen_example2
from funcdata.models import FunctionalSample, ScalarResponse
from gflm.estimator import (PenalizedDesign, fit_gflm, gcv_score, linear_predictor, penalized_irls, score_residual,
                            ubre_score)
from gflm.families import BernoulliLogit, GaussianIdentity, PoissonLog, get_family
from gflm.splines import bspline_design, bspline_knots, penalty_matrix


@pytest.fixture(scope="module")
def linear_data():
    return gen_example1(80, 0.0, rng=np.random.default_rng(31))


@pytest.fixture(scope="module")
def linear_design(linear_data):
    return PenalizedDesign.build(linear_data.sample)


@pytest.fixture(scope="module")
def logistic_data():
    return gen_example2(150, 0.0, rng=np.random.default_rng(32))


def poisson_response(data, rng):
    eta = 0.5 + data.sample.inner_products(data.beta) / 2
    return ScalarResponse(rng.poisson(np.exp(eta)).astype(float), "poisson")


def test_bspline_partition_of_unity():
    points = np.linspace(0, 1, 200)
    knots = bspline_knots(points, 20)
    design = bspline_design(points, knots)
    assert design.shape == (200, 20)
    np.testing.assert_allclose(design.sum(axis=1), 1.0, atol=1e-12)


def test_penalty_is_psd_with_linear_null_space():
    knots = bspline_knots(np.linspace(0, 1, 100), 20)
    penalty = penalty_matrix(knots, 3, 2)
    np.testing.assert_allclose(penalty, penalty.T, atol=0)
    eigenvalues = np.linalg.eigvalsh(penalty)
    assert eigenvalues.min() > -1e-8 * eigenvalues.max()
    assert np.sum(eigenvalues < 1e-9 * eigenvalues.max()) == 2
    # Greville abscissae are the coefficients reproducing t
    greville = np.array([knots[i + 1:i + 4].mean() for i in range(20)])
    for coefs in (np.ones(20), greville):
        assert coefs @ penalty @ coefs == pytest.approx(0.0, abs=1e-8)


def test_gaussian_fit_matches_closed_form(linear_data, linear_design):
    lam = linear_design.lambda_scale(np.ones(linear_design.n)) * 1e-3
    fit = fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=lam, design=linear_design)
    z, p, n = linear_design.design, linear_design.penalty, linear_design.n
    expected = np.linalg.solve(z.T @ z + n * lam * p, z.T @ linear_data.response.values)
    np.testing.assert_allclose(fit.coefficients, expected, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(fit.fitted, z @ expected, atol=1e-8)
    np.testing.assert_allclose(fit.residuals, linear_data.response.values - fit.fitted, atol=0)
    assert fit.converged


def test_constant_response_gives_flat_slope(linear_data, linear_design):
    response = ScalarResponse(np.full(linear_design.n, 2.5), "gaussian")
    fit = fit_gflm(linear_data.sample, response, "gaussian", lam=1e-4, design=linear_design)
    assert fit.alpha == pytest.approx(2.5, abs=1e-8)
    np.testing.assert_allclose(fit.beta_curve.values, 0.0, atol=1e-8)


def test_slope_estimate_improves_with_n():
    def median_error(n):
        errors = []
        for seed in range(20):
            data = gen_example1(n, 0.0, rng=np.random.default_rng(1000 + seed))
            fit = fit_gflm(data.sample, data.response, "gaussian")
            difference = fit.beta_curve.values - data.beta.values
            errors.append(np.sqrt(data.sample.grid.integrate(difference ** 2)))
        return np.median(errors)

    assert median_error(200) < median_error(50)


def test_more_smoothing_means_less_roughness(linear_data, linear_design):
    scale = linear_design.lambda_scale(np.ones(linear_design.n))
    roughness = [fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=scale * 10.0 ** k,
                          design=linear_design).roughness for k in range(-6, 2)]
    assert all(later <= earlier * (1 + 1e-9) for earlier, later in zip(roughness, roughness[1:]))


@pytest.mark.parametrize("family", ["bernoulli", "poisson"])
def test_irls_objective_is_monotone_and_stationary(logistic_data, family):
    design = PenalizedDesign.build(logistic_data.sample)
    if family == "bernoulli":
        y = logistic_data.response.values
    else:
        y = poisson_response(logistic_data, np.random.default_rng(4)).values
    lam = design.lambda_scale(np.full(design.n, 0.25)) * 1e-2
    objectives = [penalized_irls(design, y, get_family(family), lam, max_iter=k).objective for k in range(1, 8)]
    assert all(b >= a - 1e-12 for a, b in zip(objectives, objectives[1:]))
    state = penalized_irls(design, y, get_family(family), lam)
    assert state.converged
    assert state.gradient_norm <= 1e-6


def test_auto_lambda_is_chosen_by_gcv(linear_data, linear_design):
    fit = fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam="auto", design=linear_design)
    assert fit.criterion == "gcv"
    assert len(fit.lambda_path) == settings.LAMBDA_GRID_SIZE
    assert fit.lam in fit.lambda_path
    assert fit.lambda_path[fit.lam] == pytest.approx(fit.criterion_score, rel=1e-10)
    # unit weights, so deviance GCV and weighted-RSS GCV agree
    assert fit.criterion_score == pytest.approx(fit.gcv, rel=1e-10)
    assert fit.converged


def test_bernoulli_lambda_is_chosen_by_ubre_without_saturation():
    edf = []
    for seed in range(10):
        data = gen_example2(50, 0.0, rng=np.random.default_rng(500 + seed))
        fit = fit_gflm(data.sample, data.response, "bernoulli")
        assert fit.criterion == "ubre"
        assert fit.converged and not fit.separated
        assert np.all((fit.fitted > settings.SATURATION_TOL) & (fit.fitted < 1 - settings.SATURATION_TOL))
        edf.append(fit.edf)
    assert np.median(edf) < 10


def test_saturating_lambdas_are_not_selected(logistic_data):
    signal = logistic_data.sample.inner_products(logistic_data.beta)
    response = ScalarResponse((signal > np.median(signal)).astype(float), "bernoulli")
    fit = fit_gflm(logistic_data.sample, response, "bernoulli")
    assert not fit.separated
    assert not np.any(get_family("bernoulli").saturated(fit.eta, settings.SATURATION_TOL))
    # the unpenalized end of the grid saturates on this response
    assert fit.lam > min(fit.lambda_path)


def test_ubre_score_matches_its_definition(logistic_data):
    design = PenalizedDesign.build(logistic_data.sample)
    lam = design.lambda_scale(np.full(design.n, 0.25))
    fit = fit_gflm(logistic_data.sample, logistic_data.response, "bernoulli", lam=lam, design=design)
    y = logistic_data.response.values
    deviance = np.sum(get_family("bernoulli").deviance(y, fit.eta))
    expected = deviance / design.n - 1 + 2 * fit.edf / design.n
    assert ubre_score(design, logistic_data.response, "bernoulli", lam) == pytest.approx(expected, rel=1e-8)
    assert fit.criterion_score == pytest.approx(expected, rel=1e-8)


def test_bernoulli_deviance_is_twice_the_negative_loglik():
    family = get_family("bernoulli")
    y = np.array([0.0, 1.0, 1.0, 0.0])
    eta = np.array([-2.0, 0.3, 4.0, 1.5])
    np.testing.assert_allclose(family.deviance(y, eta), -2 * family.loglik(y, eta), rtol=1e-12)


def test_penalty_order_above_degree_is_rejected(linear_data):
    with pytest.raises(ValueError, match="exceeds the spline degree"):
        PenalizedDesign.build(linear_data.sample, penalty_order=4, degree=3)


def test_gcv_scores_are_finite_on_positive_grid(linear_data, linear_design):
    grid = linear_design.lambda_grid(np.ones(linear_design.n))
    scores = [gcv_score(linear_design, linear_data.response, "gaussian", lam) for lam in grid]
    assert np.all(np.isfinite(scores))


def test_heavy_penalty_leaves_null_space_degrees_of_freedom(linear_data, linear_design):
    scale = linear_design.lambda_scale(np.ones(linear_design.n))
    edf = [fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=scale * m,
                    design=linear_design).edf for m in (1e-2, 1e2, 1e8)]
    assert edf[0] > edf[1] > edf[2]
    assert edf[2] == pytest.approx(3.0, abs=0.05)


def test_gcv_on_duplicated_data(linear_data, linear_design):
    lam = linear_design.lambda_scale(np.ones(linear_design.n)) * 1e-2
    fit = fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=lam, design=linear_design)
    doubled = FunctionalSample(linear_data.sample.grid, np.vstack([linear_data.sample.values] * 2))
    response = ScalarResponse(np.tile(linear_data.response.values, 2), "gaussian")
    fit2 = fit_gflm(doubled, response, "gaussian", lam=lam)
    n = linear_design.n
    np.testing.assert_allclose(fit2.coefficients, fit.coefficients, rtol=1e-7, atol=1e-9)
    assert fit2.edf == pytest.approx(fit.edf, rel=1e-7)
    assert fit2.gcv == pytest.approx(2 * n * 2 * fit.rss_weighted / (2 * n - fit.edf) ** 2, rel=1e-7)


def test_score_residuals_equal_raw_residuals(linear_data, logistic_data):
    rng = np.random.default_rng(9)
    cases = [
        (linear_data.sample, linear_data.response, "gaussian"),
        (logistic_data.sample, logistic_data.response, "bernoulli"),
        (logistic_data.sample, poisson_response(logistic_data, rng), "poisson"),
    ]
    for sample, response, family in cases:
        fit = fit_gflm(sample, response, family)
        np.testing.assert_allclose(score_residual(fit), fit.residuals, atol=1e-12)
    fit = fit_gflm(logistic_data.sample, logistic_data.response, "bernoulli")
    np.testing.assert_allclose(score_residual(fit), logistic_data.response.values - expit(fit.eta), atol=1e-12)


def test_non_convergence_is_flagged(logistic_data, monkeypatch):
    monkeypatch.setattr(settings, "IRLS_MAX_ITER", 1)
    with pytest.warns(ConvergenceWarning):
        fit = fit_gflm(logistic_data.sample, logistic_data.response, "bernoulli", lam=1e-3)
    assert not fit.converged
    assert fit.iterations == 1


def test_separation_is_flagged(logistic_data, monkeypatch):
    monkeypatch.setattr(settings, "SEPARATION_BOUND", 50.0)
    signal = logistic_data.sample.inner_products(logistic_data.beta)
    response = ScalarResponse((signal > np.median(signal)).astype(float), "bernoulli")
    with pytest.warns(SeparationWarning):
        fit = fit_gflm(logistic_data.sample, response, "bernoulli", lam=0.0)
    assert fit.separated
    assert not fit.converged


def test_response_must_match_family(linear_data):
    with pytest.raises(DimensionError):
        fit_gflm(linear_data.sample, linear_data.response, "bernoulli", lam=1.0)


def test_family_registry():
    assert isinstance(get_family("gaussian-identity"), GaussianIdentity)
    assert isinstance(get_family("bernoulli"), BernoulliLogit)
    assert isinstance(get_family("poisson-log"), PoissonLog)
    with pytest.raises(UnsupportedFamilyError):
        get_family("gamma")


def test_fit_exports_json(linear_data, linear_design, tmp_path):
    fit = fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=1e-3, design=linear_design)
    summary = json.loads(fit.to_json(tmp_path / "fit.json"))
    assert set(summary) >= {"alpha", "lambda", "converged", "beta_coefs", "beta_curve"}
    assert len(summary["beta_coefs"]) == settings.BASIS_SIZE
    assert (tmp_path / "fit.json").exists()


def test_linear_predictor_reproduces_fitted_eta(linear_data, linear_design):
    fit = fit_gflm(linear_data.sample, linear_data.response, "gaussian", lam=1e-4, design=linear_design)
    # the slope curve is the spline on the same grid, so quadrature matches the design columns
    np.testing.assert_allclose(linear_predictor(fit, linear_data.sample), fit.eta, atol=1e-8)
