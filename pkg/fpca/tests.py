import numpy as np
import pytest

from helper.exceptions import DegenerateSampleError, DimensionError, RankDeficiencyWarning
from funcdata.generators import gen_example1
from funcdata.models import FunctionalSample, Grid
from fpca.decomposition import basis_from_eigenvalues, fit_fpca, resolve_p, select_p


@pytest.fixture(scope="module")
def example1_sample():
    return gen_example1(100, 0.0, rng=np.random.default_rng(21)).sample


def quadrature_gram(basis):
    return (basis.eigenfunctions * basis.grid.weights) @ basis.eigenfunctions.T


def test_eigenfunctions_are_orthonormal(example1_sample):
    basis = fit_fpca(example1_sample, 10)
    np.testing.assert_allclose(quadrature_gram(basis), np.eye(10), atol=1e-8)
    assert np.all(np.diff(basis.eigenvalues) <= 0)
    assert np.all(basis.eigenvalues >= 0)


def test_scores_are_centered_projections(example1_sample):
    basis = fit_fpca(example1_sample, 5)
    centered = example1_sample.values - example1_sample.values.mean(axis=0)
    expected = (centered * example1_sample.grid.weights) @ basis.eigenfunctions.T
    np.testing.assert_allclose(basis.scores, expected, atol=1e-10)


def test_score_covariance_is_diagonal(example1_sample):
    basis = fit_fpca(example1_sample, 8)
    covariance = basis.scores.T @ basis.scores / basis.n
    np.testing.assert_allclose(np.diag(covariance), basis.eigenvalues, rtol=1e-8)
    off_diagonal = covariance - np.diag(np.diag(covariance))
    assert np.max(np.abs(off_diagonal)) <= 1e-8


def test_full_rank_reconstruction(example1_sample):
    basis = fit_fpca(example1_sample)
    residual = basis.reconstruct() - example1_sample.values
    norms = np.sqrt(example1_sample.grid.integrate(residual ** 2))
    assert norms.max() <= 1e-6


def test_leading_eigenvalues_match_population():
    sample = gen_example1(3000, 0.0, rng=np.random.default_rng(8)).sample
    basis = fit_fpca(sample, 3)
    # sampling sd of an eigenvalue estimate is about kappa * sqrt(2 / n)
    assert basis.eigenvalues[0] == pytest.approx(1.0, abs=4 * np.sqrt(2 / 3000))
    assert basis.eigenvalues[1] == pytest.approx(2 ** -1.7, abs=4 * 0.3078 * np.sqrt(2 / 3000))


def test_rank_one_sample():
    grid = Grid.uniform(50)
    f = np.sin(2 * np.pi * grid.points) + grid.points
    sample = FunctionalSample(grid, np.vstack([f, -f]))
    basis = fit_fpca(sample, 1)
    assert basis.eigenvalues[0] > 0
    direction = f / np.sqrt(grid.integrate(f ** 2))
    assert abs(grid.integrate(basis.eigenfunctions[0] * direction)) == pytest.approx(1.0, abs=1e-10)


def test_common_shift_leaves_basis_unchanged(example1_sample):
    shift = np.cos(3 * example1_sample.grid.points) + 2.0
    original = fit_fpca(example1_sample, 6)
    shifted = fit_fpca(example1_sample.shifted(shift), 6)
    np.testing.assert_allclose(shifted.eigenfunctions, original.eigenfunctions, atol=1e-8)
    np.testing.assert_allclose(shifted.scores, original.scores, atol=1e-8)


def test_sign_convention(example1_sample):
    basis = fit_fpca(example1_sample, 4)
    pivots = np.argmax(np.abs(basis.eigenfunctions), axis=1)
    assert np.all(basis.eigenfunctions[np.arange(4), pivots] > 0)


def test_identical_curves_warn_and_zero_spectrum():
    grid = Grid.uniform(20)
    sample = FunctionalSample(grid, np.tile(grid.points, (4, 1)))
    with pytest.warns(RankDeficiencyWarning):
        basis = fit_fpca(sample, 2)
    np.testing.assert_array_equal(basis.eigenvalues, np.zeros(2))
    with pytest.raises(DegenerateSampleError):
        select_p(basis, 0.95)


@pytest.mark.parametrize("p_max", [0, 100])
def test_p_max_out_of_range(example1_sample, p_max):
    with pytest.raises(DimensionError):
        fit_fpca(example1_sample, p_max)


@pytest.mark.parametrize("eigenvalues, expected", [((0.95, 0.05), 1), ((0.5, 0.3, 0.15, 0.05), 3)])
def test_select_p_examples(eigenvalues, expected):
    basis = basis_from_eigenvalues(Grid.uniform(10), eigenvalues)
    assert select_p(basis, 0.95) == expected


def test_select_p_tracks_population_spectrum(example1_sample):
    kappa = np.arange(1, 101) ** -1.7
    population_p = int(np.argmax(np.cumsum(kappa) / kappa.sum() >= 0.95)) + 1
    assert 20 <= population_p <= 30
    assert abs(select_p(fit_fpca(example1_sample), 0.95) - population_p) <= 10


def test_select_p_is_monotone_in_threshold(example1_sample):
    basis = fit_fpca(example1_sample)
    chosen = [select_p(basis, threshold) for threshold in (0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 1.0)]
    assert chosen == sorted(chosen)


@pytest.mark.parametrize("threshold", [0.0, 1.5])
def test_select_p_threshold_range(example1_sample, threshold):
    with pytest.raises(ValueError):
        select_p(fit_fpca(example1_sample, 5), threshold)


def test_resolve_p_modes(example1_sample):
    basis = fit_fpca(example1_sample)
    assert resolve_p(basis, "auto") == select_p(basis, 0.95)
    assert resolve_p(basis, "fixed:5") == 5
    assert resolve_p(basis, 10) == 10
    with pytest.raises(DimensionError):
        resolve_p(basis, 500)


def test_basis_exports_csv(example1_sample, tmp_path):
    basis = fit_fpca(example1_sample, 3)
    text = basis.to_csv(tmp_path / "basis.csv").read_text().splitlines()
    assert text[0].startswith("component,eigenvalue,explained_variance_ratio")
    assert len(text) == 4
