import numpy as np
import pytest

from pagof_main import settings
from helper.exceptions import BootstrapAbortError, ClampWarning, NumericalError, UnsupportedFamilyError
from funcdata.generators import gen_example1, gen_example2
from funcdata.models import ScalarResponse
from gflm.estimator import fit_gflm
from bootstrap import procedures
from bootstrap.models import BINARY, WILD, GofResult, critical_value
from bootstrap.procedures import (binary_bootstrap_test, bootstrap_statistics, clamp_probabilities,
                                  norm_matched_residuals, run_gof_test, wild_bootstrap_test)
from gof.statistic import angle_kernel_matrix, tn_from_kernel
from bootstrap.weights import MAMMEN_ATOMS, MAMMEN_PROBABILITIES, wild_weights


@pytest.fixture(scope="module")
def linear_case():
    data = gen_example1(40, 0.0, rng=np.random.default_rng(17))
    return data, fit_gflm(data.sample, data.response, "gaussian")


@pytest.fixture(scope="module")
def logistic_case():
    data = gen_example2(60, 0.0, rng=np.random.default_rng(23))
    return data, fit_gflm(data.sample, data.response, "bernoulli")


def test_two_point_law_moments():
    assert MAMMEN_PROBABILITIES.sum() == pytest.approx(1.0, abs=1e-15)
    assert MAMMEN_PROBABILITIES @ MAMMEN_ATOMS == pytest.approx(0.0, abs=1e-15)
    assert MAMMEN_PROBABILITIES @ MAMMEN_ATOMS ** 2 == pytest.approx(1.0, abs=1e-15)
    assert MAMMEN_PROBABILITIES @ MAMMEN_ATOMS ** 3 == pytest.approx(1.0, abs=1e-14)


def test_wild_weight_draws():
    draws = wild_weights(1_000_000, np.random.default_rng(5))
    assert set(np.unique(draws)) <= set(MAMMEN_ATOMS)
    assert abs(draws.mean()) <= 4 / np.sqrt(1_000_000)
    # Var(v^2) = E v^4 - 1 = 1 for this law
    assert abs(np.mean(draws ** 2) - 1) <= 4 / np.sqrt(1_000_000)


def test_wild_weights_need_positive_count():
    with pytest.raises(ValueError):
        wild_weights(0)


def test_critical_value_is_an_order_statistic():
    stats = np.arange(1.0, 101.0)
    assert critical_value(stats, 0.05) == 95.0
    assert critical_value(stats, 0.10) == 90.0
    assert critical_value(stats[::-1], 0.01) == 99.0


def test_p_value_counts_ties():
    result = GofResult.from_draws(3.0, np.array([1.0, 3.0, 3.0, 5.0]), 0.5, WILD, 1, 2)
    assert result.p_value == 0.75
    assert not result.reject


def test_result_invariants_and_levels():
    rng = np.random.default_rng(1)
    stats = rng.exponential(size=200)
    for t_n in (0.1, 1.0, 3.0, 6.0):
        result = GofResult.from_draws(t_n, stats, 0.05, WILD, None, 3)
        assert result.p_value == np.mean(stats >= t_n)
        assert result.reject == (result.p_value < 0.05)
        if t_n > result.critical_value:
            assert result.p_value < 0.05 + 1 / 200
        loose = result.at_level(0.5)
        assert loose.alpha == 0.5 and loose.reject == (result.p_value < 0.5)
        np.testing.assert_array_equal(loose.boot_stats, result.boot_stats)


def test_result_serialization():
    result = GofResult.from_draws(0.2, np.linspace(0, 1, 100), 0.05, BINARY, 7, 4, "fixed:4")
    assert "boot_stats" not in result.to_dict(include_boot_stats=False)
    assert len(result.to_dict()["boot_stats"]) == 100
    assert '"scheme": "binary-model-based"' in result.to_json()


def test_wild_bootstrap_is_reproducible(linear_case):
    data, fit = linear_case
    first = wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=3, n_jobs=1)
    second = wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=3, n_jobs=1)
    assert first.B == 100 and first.boot_stats.shape == (100,)
    assert np.all(np.isfinite(first.boot_stats))
    np.testing.assert_array_equal(first.boot_stats, second.boot_stats)
    assert first.t_n == second.t_n and first.seed == 3
    assert 0.0 <= first.p_value <= 1.0


def test_replicates_do_not_depend_on_parallelism(linear_case):
    data, fit = linear_case
    serial = wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=8, n_jobs=1)
    parallel = wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=8, n_jobs=2)
    np.testing.assert_array_equal(serial.boot_stats, parallel.boot_stats)


def test_modes_share_replicates(linear_case):
    data, fit = linear_case
    draws = bootstrap_statistics(data.sample, fit, "gaussian", WILD, 100, ("auto", "5"), rng=4, n_jobs=1)
    single = wild_bootstrap_test(data.sample, data.response, fit, B=100, p_mode="5", rng=4, n_jobs=1)
    np.testing.assert_array_equal(draws.result("5").boot_stats, single.boot_stats)
    assert draws.result("5").p == 5
    assert draws.result("auto", 0.1).alpha == 0.1


def test_exact_fit_never_rejects(linear_case, monkeypatch):
    monkeypatch.setattr(settings, "EXACT_FIT_TOL", 1e-8)
    data, _ = linear_case
    response = ScalarResponse(np.full(data.sample.n, 3.0), "gaussian")
    fit = fit_gflm(data.sample, response, "gaussian", lam=1e-3)
    result = wild_bootstrap_test(data.sample, response, fit, B=100, rng=0, n_jobs=1)
    assert np.all(result.boot_stats == 0)
    assert result.p_value == 1.0
    for alpha in (0.01, 0.05, 0.5):
        assert not result.at_level(alpha).reject


def test_wild_response_is_fitted_plus_weighted_residuals(linear_case):
    _, fit = linear_case
    y = procedures._draw_response(WILD, fit, None, np.random.default_rng(11))
    weights = wild_weights(fit.n, np.random.default_rng(11))
    np.testing.assert_array_equal(y, fit.fitted + fit.residuals * weights)
    sizable = np.abs(fit.residuals) > 1e-3
    ratios = (y - fit.fitted)[sizable] / fit.residuals[sizable]
    assert np.all(np.isclose(ratios[:, None], MAMMEN_ATOMS).any(axis=1))


def test_binary_response_draws_from_permuted_probabilities(logistic_case):
    _, fit = logistic_case
    probabilities = clamp_probabilities(fit.fitted)
    y = procedures._draw_response(BINARY, fit, probabilities, np.random.default_rng(12))
    replay = np.random.default_rng(12)
    permuted = replay.permutation(probabilities)
    uniforms = replay.uniform(size=fit.n)
    np.testing.assert_array_equal(np.sort(permuted), np.sort(probabilities))
    np.testing.assert_array_equal(y, (uniforms < permuted).astype(float))
    assert set(np.unique(y)) <= {0.0, 1.0}


def test_equal_probabilities_give_fair_coin_draws(logistic_case):
    _, fit = logistic_case
    half = np.full(fit.n, 0.5)
    rng = np.random.default_rng(13)
    draws = np.vstack([procedures._draw_response(BINARY, fit, half, rng) for _ in range(2000)])
    assert abs(draws.mean() - 0.5) <= 4 * np.sqrt(0.25 / draws.size)
    # columns are exchangeable, so no observation is favoured
    assert np.all(np.abs(draws.mean(axis=0) - 0.5) <= 4 * np.sqrt(0.25 / 2000))


def test_norm_matched_residuals_follow_the_scaling_law(linear_case):
    data, fit = linear_case
    kernel = angle_kernel_matrix(np.random.default_rng(14).normal(size=(data.sample.n, 3)))
    residuals = np.random.default_rng(15).normal(size=data.sample.n)
    target = float(fit.residuals @ fit.residuals)
    matched = norm_matched_residuals(residuals, target)
    assert matched @ matched == pytest.approx(target, rel=1e-12)
    expected = tn_from_kernel(kernel, residuals) * target / (residuals @ residuals)
    assert tn_from_kernel(kernel, matched) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(NumericalError):
        norm_matched_residuals(np.zeros(4), target)


def test_norm_matching_only_rescales_replicates(linear_case):
    data, fit = linear_case
    matched = bootstrap_statistics(data.sample, fit, "gaussian", WILD, 100, rng=16, n_jobs=1, norm_matched=True)
    raw = bootstrap_statistics(data.sample, fit, "gaussian", WILD, 100, rng=16, n_jobs=1, norm_matched=False)
    assert matched.t_n == raw.t_n
    np.testing.assert_array_equal(np.sign(matched.boot_stats["auto"]), np.sign(raw.boot_stats["auto"]))
    assert matched.redraws == raw.redraws


def test_replicates_reproduce_the_constant_kernel_term(linear_case, monkeypatch):
    data, fit = linear_case
    n = data.sample.n
    mean_angle = (n - 2) * 2 * np.pi / 3
    monkeypatch.setattr(procedures, "angle_kernel_matrix",
                        lambda scores, n_jobs=None: mean_angle * (np.ones((n, n)) - np.eye(n)))
    draws = bootstrap_statistics(data.sample, fit, "gaussian", WILD, 100, rng=18, n_jobs=1, norm_matched=True)
    t_n = draws.t_n["auto"]
    assert t_n == pytest.approx(-mean_angle * (fit.residuals @ fit.residuals) / (n * (n - 1) * (n - 2)), rel=1e-8)
    np.testing.assert_allclose(draws.boot_stats["auto"], t_n, rtol=1e-8)


def test_binary_bootstrap(logistic_case):
    data, fit = logistic_case
    result = binary_bootstrap_test(data.sample, data.response, fit, B=100, rng=6, n_jobs=1)
    assert result.scheme == BINARY
    assert np.all(np.isfinite(result.boot_stats))


def test_probabilities_are_clamped():
    with pytest.warns(ClampWarning):
        clamped = clamp_probabilities(np.array([0.0, 0.5, 1.0]))
    assert clamped[0] > 0 and clamped[-1] < 1 and clamped[1] == 0.5


def test_clamp_message_shows_the_upper_bound(monkeypatch):
    monkeypatch.setattr(settings, "PROBABILITY_CLAMP", 1e-10)
    with pytest.warns(ClampWarning, match=r"0\.9999999999\b"):
        clamp_probabilities(np.array([1.0, 0.5]))


def test_scheme_must_match_family(linear_case, logistic_case):
    data, fit = linear_case
    with pytest.raises(UnsupportedFamilyError):
        binary_bootstrap_test(data.sample, data.response, fit, B=100)
    data, fit = logistic_case
    with pytest.raises(UnsupportedFamilyError):
        wild_bootstrap_test(data.sample, data.response, fit, "bernoulli", B=100)


def test_poisson_has_no_calibrated_scheme(linear_case):
    data, _ = linear_case
    counts = ScalarResponse(np.random.default_rng(0).poisson(2.0, data.sample.n).astype(float), "poisson")
    with pytest.raises(UnsupportedFamilyError):
        run_gof_test(data.sample, counts, B=100)


def test_too_few_replicates(linear_case):
    data, fit = linear_case
    with pytest.raises(ValueError):
        wild_bootstrap_test(data.sample, data.response, fit, B=20)


def test_failed_replicate_is_redrawn(linear_case, monkeypatch):
    data, fit = linear_case
    calls = {"count": 0}
    original = procedures.refit

    def flaky(*args, **kwargs):
        calls["count"] += 1
        if calls["count"] == 1:
            raise NumericalError("singular system")
        return original(*args, **kwargs)

    monkeypatch.setattr(procedures, "refit", flaky)
    result = wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=2, n_jobs=1)
    assert result.redraws == 1 and result.B == 100


def test_two_failures_abort(linear_case, monkeypatch):
    data, fit = linear_case

    def broken(*args, **kwargs):
        raise NumericalError("singular system")

    monkeypatch.setattr(procedures, "refit", broken)
    with pytest.raises(BootstrapAbortError) as excinfo:
        wild_bootstrap_test(data.sample, data.response, fit, B=100, rng=2, n_jobs=1)
    assert excinfo.value.replicate == 0
    assert excinfo.value.diagnostics["scheme"] == WILD


def test_run_gof_test_end_to_end():
    data = gen_example1(40, 0.0, rng=np.random.default_rng(31))
    fit, result = run_gof_test(data.sample, data.response, B=100, rng=9, n_jobs=1)
    assert fit.family == "gaussian-identity"
    assert result.scheme == WILD and 0 <= result.p_value <= 1
