import numpy as np
import pytest

from helper.exceptions import DimensionError, InvalidSizeError
from funcdata.generators import example2_beta, gen_example1, gen_example2
from funcdata.io import read_response_csv, read_sample_csv, write_response_csv, write_sample_csv
from funcdata.models import Curve, FunctionalSample, Grid, ScalarResponse, inner_product


@pytest.fixture
def grid():
    return Grid.uniform(1000)


def test_grid_weights_sum_to_length(grid):
    assert grid.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(grid.weights > 0)


@pytest.mark.parametrize("points", [[0.5], [0.0, 0.5, 0.4], [-0.1, 0.5], [0.2, 1.2]])
def test_grid_rejects_bad_points(points):
    with pytest.raises(DimensionError):
        Grid(np.array(points))


def test_inner_product_of_unit_constant(grid):
    one = Curve.from_function(grid, np.ones_like)
    assert inner_product(one, one) == pytest.approx(1.0, abs=1e-12)


def test_cosine_basis_is_orthogonal(grid):
    f = Curve.from_function(grid, lambda t: np.sqrt(2) * np.cos(np.pi * t))
    g = Curve.from_function(grid, lambda t: np.sqrt(2) * np.cos(2 * np.pi * t))
    assert inner_product(f, g) == pytest.approx(0.0, abs=1e-6)


def test_inner_product_of_identity(grid):
    f = Curve.from_function(grid, lambda t: t)
    # trapezoid error for t^2 is h^2 / 6
    assert inner_product(f, f) == pytest.approx(1 / 3, abs=1e-6)


def test_inner_product_is_symmetric_bilinear_and_positive(grid):
    rng = np.random.default_rng(3)
    f, g, h = (Curve(grid, rng.standard_normal(len(grid))) for _ in range(3))
    assert inner_product(f, g) == pytest.approx(inner_product(g, f), rel=1e-12)
    combo = Curve(grid, 2.0 * f.values - 3.0 * h.values)
    expected = 2.0 * inner_product(f, g) - 3.0 * inner_product(h, g)
    assert inner_product(combo, g) == pytest.approx(expected, rel=1e-10, abs=1e-12)
    assert inner_product(f, f) >= 0


def test_inner_product_grid_mismatch():
    f = Curve.from_function(Grid.uniform(10), np.ones_like)
    g = Curve.from_function(Grid.uniform(11), np.ones_like)
    with pytest.raises(DimensionError):
        inner_product(f, g)


def test_sample_rejects_non_finite_values(grid):
    values = np.zeros((3, len(grid)))
    values[1, 4] = np.nan
    with pytest.raises(DimensionError):
        FunctionalSample(grid, values)


@pytest.mark.parametrize("values, family", [([0, 1, 2], "bernoulli"), ([1.5, 2], "poisson"), ([-1, 2], "poisson")])
def test_response_support(values, family):
    with pytest.raises(DimensionError):
        ScalarResponse(np.array(values), family)


@pytest.mark.parametrize("generator", [gen_example1, gen_example2])
def test_generators_need_triples(generator):
    with pytest.raises(InvalidSizeError):
        generator(2, 0.0, rng=0)


@pytest.mark.parametrize("generator", [gen_example1, gen_example2])
def test_generators_are_reproducible(generator):
    first = generator(20, 0.1, rng=np.random.default_rng(11))
    second = generator(20, 0.1, rng=np.random.default_rng(11))
    np.testing.assert_array_equal(first.sample.values, second.sample.values)
    np.testing.assert_array_equal(first.response.values, second.response.values)
    np.testing.assert_array_equal(first.beta.values, second.beta.values)
    assert np.all(np.isfinite(first.sample.values))
    assert first.sample.values.shape == (20, 1000)


def test_example1_null_is_linear():
    rng = np.random.default_rng(5)
    data = gen_example1(50, 0.0, rng=rng)
    # with a = 0 the residual of the true linear predictor is pure N(0, 1) noise
    noise = data.response.values - data.sample.inner_products(data.beta)
    assert abs(noise.mean()) < 4 / np.sqrt(50)
    assert 0.5 < noise.var() < 1.6


def test_example1_beta_is_unit_direction():
    data = gen_example1(5, 0.0, rng=7)
    assert inner_product(data.beta, data.beta) == pytest.approx(1.5, rel=1e-6)
    assert data.active_component in (1, 2)


def test_example1_first_score_variance():
    data = gen_example1(4000, 0.0, rng=np.random.default_rng(1))
    one = np.ones(len(data.sample.grid))
    scores = data.sample.inner_products(one)
    # var of a sample variance of N(0, 1) draws is 2 / n
    assert scores.var() == pytest.approx(1.0, abs=3 * np.sqrt(2 / 4000))


def test_example1_signal_strength_for_constant_beta():
    rng = np.random.default_rng(2)
    data = gen_example1(4000, 0.0, rng=rng)
    while data.active_component != 1:
        data = gen_example1(4000, 0.0, rng=rng)
    signal = data.sample.inner_products(data.beta) ** 2
    standard_error = signal.std() / np.sqrt(signal.size)
    assert abs(signal.mean() - 1.5) < 3 * standard_error


def test_example2_scores_are_clamped():
    data = gen_example2(30, 0.0, rng=4)
    grid = data.sample.grid
    j = np.arange(1, 101)[:, None]
    basis = np.sqrt(2) * np.sin((j - 0.5) * np.pi * grid.points)
    scores = data.sample.inner_products(basis) * (j.ravel() - 0.5) * np.pi
    assert np.all(np.abs(scores) <= 0.5 + 1e-3)
    bound = 0.5 * np.sqrt(2) * np.sum(1 / ((np.arange(1, 101) - 0.5) * np.pi))
    assert np.all(np.abs(data.sample.values) <= bound)
    assert set(np.unique(data.response.values)) <= {0.0, 1.0}


def test_example2_beta_closed_form():
    assert example2_beta(0.5) == pytest.approx(2.28881835, rel=1e-8)


def test_csv_round_trip_is_byte_stable(tmp_path):
    data = gen_example2(6, 0.5, rng=9)
    first = write_sample_csv(data.sample, tmp_path / "a.csv")
    second = write_sample_csv(read_sample_csv(first), tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()
    response_path = write_response_csv(data.response, tmp_path / "y.csv")
    np.testing.assert_array_equal(read_response_csv(response_path, "bernoulli").values, data.response.values)


def test_csv_reads_back_every_bit(tmp_path):
    data = gen_example1(40, 0.2, rng=np.random.default_rng(19))
    sample = read_sample_csv(write_sample_csv(data.sample, tmp_path / "x.csv"))
    np.testing.assert_array_equal(sample.values, data.sample.values)
    np.testing.assert_array_equal(sample.grid.points, data.sample.grid.points)
    response = read_response_csv(write_response_csv(data.response, tmp_path / "y.csv"))
    np.testing.assert_array_equal(response.values, data.response.values)


def test_sample_curves_and_mean(grid):
    values = np.vstack([grid.points, 1 - grid.points])
    sample = FunctionalSample(grid, values)
    np.testing.assert_allclose(sample.mean_curve().values, 0.5)
    assert sample.curve(1)(0.25) == pytest.approx(0.75)
    assert inner_product(sample.curve(0), sample.curve(1)) == pytest.approx(1 / 6, abs=1e-6)
