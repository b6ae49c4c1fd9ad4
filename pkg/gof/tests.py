import numpy as np
import pytest
from scipy.stats import ortho_group

from helper.exceptions import DegeneratePairError, InvalidSizeError
from funcdata.generators import gen_example1
from fpca.decomposition import fit_fpca
from gflm.estimator import fit_gflm
from gof.kernels import angle, sphere_overlap_closed_form, sphere_overlap_monte_carlo, uniform_sphere_directions
from gof.oracles import conditional_moment_probe, cvm_projection_oracle
from gof.statistic import angle_kernel_matrix, brute_force_tn, compute_tn, tn_from_kernel

HAND_SCORES = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])


@pytest.fixture
def instance():
    rng = np.random.default_rng(11)
    return rng.standard_normal(30), rng.standard_normal((30, 4))


@pytest.mark.parametrize("u, v, expected", [
    ((1, 0), (1, 0), 0.0),
    ((1, 0), (0, 1), np.pi / 2),
    ((1, 0), (-1, 0), np.pi),
])
def test_angle_examples(u, v, expected):
    assert angle(u, v) == pytest.approx(expected, abs=1e-12)


def test_angle_properties():
    rng = np.random.default_rng(3)
    for _ in range(50):
        u, v = rng.standard_normal((2, 5))
        assert angle(u, v) == angle(v, u)
        assert angle(3.7 * u, v) == pytest.approx(angle(u, v), abs=1e-12)
        assert angle(u, -v) == pytest.approx(np.pi - angle(u, v), abs=1e-12)


def test_angle_rejects_zero_vector():
    with pytest.raises(DegeneratePairError):
        angle([0.0, 0.0], [1.0, 0.0])


def test_closed_form_overlap_examples():
    u = np.array([0.3, -1.2, 2.0])
    assert sphere_overlap_closed_form(u, u) == pytest.approx(0.5, abs=1e-12)
    assert sphere_overlap_closed_form(u, -u) == pytest.approx(0.0, abs=1e-12)
    estimate, _ = sphere_overlap_monte_carlo([1.0, 0.0], [0.0, 1.0], 100_000, np.random.default_rng(0))
    assert estimate == pytest.approx(0.25, abs=5e-3)


def test_closed_form_overlap_matches_sphere_integral():
    rng = np.random.default_rng(2024)
    hits = 0
    for p in (1, 2, 3, 5, 10):
        for _ in range(20):
            u, v = rng.standard_normal((2, p))
            exact = sphere_overlap_closed_form(u, v)
            assert 0.0 <= exact <= 0.5
            estimate, se = sphere_overlap_monte_carlo(u, v, 100_000, rng)
            hits += abs(estimate - exact) <= 3 * se
    assert hits >= 97


def test_sphere_directions_have_unit_norm():
    directions = uniform_sphere_directions(500, 7, np.random.default_rng(1))
    np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0, atol=1e-12)


def test_triple_overlap_is_an_angle_of_differences():
    rng = np.random.default_rng(5)
    u, v, w = rng.standard_normal((3, 3))
    exact = sphere_overlap_closed_form(u - w, v - w)
    assert exact == pytest.approx(angle(u - w, w - v) / (2 * np.pi), abs=1e-12)
    estimate, se = sphere_overlap_monte_carlo(u - w, v - w, 100_000, rng)
    assert abs(estimate - exact) <= 4 * se


def test_zero_residuals_give_zero_statistic(instance):
    _, scores = instance
    assert compute_tn(np.zeros(30), scores).t_n == 0.0


def test_hand_derived_three_point_case():
    residuals = np.ones(3)
    assert compute_tn(residuals, HAND_SCORES).t_n == pytest.approx(2 * np.pi / 3, abs=1e-12)
    assert brute_force_tn(residuals, HAND_SCORES) == pytest.approx(2 * np.pi / 3, abs=1e-12)


def test_matches_brute_force_enumeration():
    rng = np.random.default_rng(99)
    for _ in range(50):
        n = int(rng.integers(3, 9))
        p = int(rng.integers(1, 5))
        residuals, scores = rng.standard_normal(n), rng.standard_normal((n, p))
        fast = compute_tn(residuals, scores, chunk_size=int(rng.integers(1, 5))).t_n
        assert fast == pytest.approx(brute_force_tn(residuals, scores), abs=1e-12)


def test_tied_scores_contribute_zero():
    rng = np.random.default_rng(7)
    scores = rng.standard_normal((6, 2))
    scores[4] = scores[1]
    residuals = rng.standard_normal(6)
    assert compute_tn(residuals, scores).t_n == pytest.approx(brute_force_tn(residuals, scores), abs=1e-12)


def test_kernel_is_symmetric_with_zero_diagonal(instance):
    _, scores = instance
    kernel = angle_kernel_matrix(scores)
    np.testing.assert_allclose(kernel, kernel.T, atol=1e-12)
    assert np.all(np.diag(kernel) == 0)


def test_result_does_not_depend_on_parallelism(instance):
    residuals, scores = instance
    serial = compute_tn(residuals, scores, n_jobs=1, chunk_size=4)
    parallel = compute_tn(residuals, scores, n_jobs=2, chunk_size=4)
    assert serial.t_n == parallel.t_n


def test_recomputation_is_exact(instance):
    statistic = compute_tn(*instance)
    assert statistic.recompute() == statistic.t_n
    assert statistic.p == 4 and statistic.n == 30


def test_invariances(instance):
    residuals, scores = instance
    reference = compute_tn(residuals, scores).t_n
    order = np.random.default_rng(1).permutation(30)
    rotation = ortho_group.rvs(4, random_state=2)

    assert compute_tn(residuals[order], scores[order]).t_n == pytest.approx(reference, abs=1e-10)
    assert compute_tn(residuals, scores + np.array([5.0, -2.0, 0.3, 1.0])).t_n == pytest.approx(reference, abs=1e-10)
    assert compute_tn(residuals, scores @ rotation).t_n == pytest.approx(reference, abs=1e-10)
    assert compute_tn(2.5 * residuals, scores).t_n == pytest.approx(2.5 ** 2 * reference, abs=1e-10)


def test_kernel_reuse_with_new_residuals(instance):
    residuals, scores = instance
    kernel = angle_kernel_matrix(scores)
    other = residuals[::-1].copy()
    assert tn_from_kernel(kernel, other) == pytest.approx(compute_tn(other, scores).t_n, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_needs_three_observations(n):
    with pytest.raises(InvalidSizeError):
        compute_tn(np.ones(n), np.ones((n, 2)))


def test_cvm_oracle_with_zero_residuals():
    result = cvm_projection_oracle(np.zeros(5), np.random.default_rng(0).standard_normal((5, 2)), 500, 1)
    assert result.v_statistic == 0.0 and result.tn_equivalent == 0.0


def test_cvm_oracle_splits_diagonal_triples_exactly():
    residuals = np.array([1.0, -0.5, 2.0])
    directions = uniform_sphere_directions(200, 2, np.random.default_rng(4))
    result = cvm_projection_oracle(residuals, HAND_SCORES, 200, np.random.default_rng(4))

    full, distinct = 0.0, 0.0
    for gamma in directions:
        projected = HAND_SCORES @ gamma
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    term = residuals[i] * residuals[j] * (projected[i] <= projected[k]) * (projected[j] <= projected[k])
                    full += term
                    if len({i, j, k}) == 3:
                        distinct += term
    assert result.v_statistic == pytest.approx(full / (200 * 27), abs=1e-12)
    assert result.distinct_part == pytest.approx(distinct / (200 * 27), abs=1e-12)
    assert result.diagonal_part == pytest.approx((full - distinct) / (200 * 27), abs=1e-12)


def test_cvm_oracle_agrees_with_angle_statistic():
    three_point = cvm_projection_oracle(np.ones(3), HAND_SCORES, 20_000, np.random.default_rng(8))
    assert three_point.tn_equivalent == pytest.approx(2 * np.pi / 3, abs=0.05)

    rng = np.random.default_rng(12)
    residuals, scores = rng.standard_normal(10), rng.standard_normal((10, 3))
    oracle = cvm_projection_oracle(residuals, scores, 20_000, rng)
    assert oracle.tn_equivalent == pytest.approx(compute_tn(residuals, scores).t_n, abs=0.05)


def test_probe_vanishes_for_zero_residuals(instance):
    _, scores = instance
    assert conditional_moment_probe(scores, np.zeros(30), 100, 0) == 0.0


def _null_fit_probe(a, seed, n=500):
    data = gen_example1(n, a, rng=np.random.default_rng(seed))
    scores = fit_fpca(data.sample, 3).scores
    fit = fit_gflm(data.sample, data.response, "gaussian")
    return conditional_moment_probe(scores, fit.residuals, 500, np.random.default_rng(seed + 1))


def test_probe_is_on_root_n_scale_under_null():
    for seed in (1, 2, 3):
        assert _null_fit_probe(0.0, seed) <= 5 / np.sqrt(500)


def test_probe_grows_under_misspecification():
    # same X, beta and noise; only the quadratic deviation differs
    assert _null_fit_probe(1.0, 4) > 2 * _null_fit_probe(0.0, 4)
