"""
Data-generating processes of the two simulation studies.

Example 1 is a functional linear model with a quadratic deviation
a * <X, X>; Example 2 is a functional logistic model with the deviation
a * exp(<X, beta>) inside the logit.
"""

from typing import NamedTuple

import numpy as np
from scipy.special import expit

from pagof_main import settings  # noqa: F401  (resolves log settings)
from helper.logger_setup import setup_logger
from helper.random_streams import RandomSource, as_generator
from funcdata.models import Curve, FunctionalSample, Grid, ScalarResponse, require_triples

logger = setup_logger('funcdata')

GRID_SIZE = 1000
N_COMPONENTS = 100
EXAMPLE1_DECAY = 1.7
EXAMPLE1_SIGNAL = 1.5  # r^2
EXAMPLE2_CLAMP = 0.5
EXAMPLE2_SCALE = 3e5


class SimulatedData(NamedTuple):
    sample: FunctionalSample
    response: ScalarResponse
    beta: Curve
    active_component: int | None = None


def cosine_basis(grid: Grid, n_components: int = N_COMPONENTS) -> np.ndarray:
    """phi_1 = 1, phi_j = sqrt(2) cos((j - 1) pi t); rows are components."""
    j = np.arange(n_components)[:, None]
    basis = np.sqrt(2.0) * np.cos(j * np.pi * grid.points[None, :])
    basis[0] = 1.0
    return basis


def sine_basis(grid: Grid, n_components: int = N_COMPONENTS) -> np.ndarray:
    """V_j = sqrt(2) sin((j - 0.5) pi t)."""
    j = np.arange(1, n_components + 1)[:, None]
    return np.sqrt(2.0) * np.sin((j - 0.5) * np.pi * grid.points[None, :])


def example1_eigenvalues(n_components: int = N_COMPONENTS) -> np.ndarray:
    return np.arange(1, n_components + 1, dtype=float) ** -EXAMPLE1_DECAY


def example2_eigenvalues(n_components: int = N_COMPONENTS) -> np.ndarray:
    return 1.0 / ((np.arange(1, n_components + 1) - 0.5) ** 2 * np.pi ** 2)


def example2_beta(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return EXAMPLE2_SCALE * t ** 11 * (1 - t) ** 6


def _check_arguments(n: int, a: float) -> None:
    require_triples(n)
    if a < 0:
        raise ValueError(f"deviation a must be nonnegative, got {a}")


def gen_example1(n: int, a: float, rng: RandomSource = None, grid_size: int = GRID_SIZE) -> SimulatedData:
    _check_arguments(n, a)
    rng = as_generator(rng)
    grid = Grid.uniform(grid_size)
    basis = cosine_basis(grid)
    kappa = example1_eigenvalues()

    eta = rng.standard_normal((n, N_COMPONENTS))
    sample = FunctionalSample(grid, (eta * np.sqrt(kappa)) @ basis)

    # theta_bar = b * I with (I_1, I_2) ~ Mult(1; .5, .5): one active coordinate
    b = rng.uniform(0.0, 1.0, size=2)
    active = int(rng.integers(0, 2))
    theta_bar = np.zeros(N_COMPONENTS)
    theta_bar[active] = b[active]
    theta = theta_bar / np.linalg.norm(theta_bar)
    beta = Curve(grid, np.sqrt(EXAMPLE1_SIGNAL) * theta @ basis)

    epsilon = rng.standard_normal(n)
    y = sample.inner_products(beta) + a * sample.squared_norms() + epsilon
    logger.debug(f"example1 draw: n={n}, a={a}, active component={active + 1}")
    return SimulatedData(sample, ScalarResponse(y, "gaussian"), beta, active + 1)


def gen_example2(n: int, a: float, rng: RandomSource = None, grid_size: int = GRID_SIZE) -> SimulatedData:
    _check_arguments(n, a)
    rng = as_generator(rng)
    grid = Grid.uniform(grid_size)
    basis = sine_basis(grid)
    lam = example2_eigenvalues()

    xi = rng.standard_normal((n, N_COMPONENTS))
    eta = np.clip(xi, -EXAMPLE2_CLAMP, EXAMPLE2_CLAMP)
    sample = FunctionalSample(grid, (eta * np.sqrt(lam)) @ basis)

    beta = Curve.from_function(grid, example2_beta)
    linear = sample.inner_products(beta)
    prob = expit(linear + a * np.exp(linear))
    y = (rng.uniform(size=n) < prob).astype(float)
    logger.debug(f"example2 draw: n={n}, a={a}, share of ones={y.mean():.3f}")
    return SimulatedData(sample, ScalarResponse(y, "bernoulli"), beta)


GENERATORS = {
    "example1": gen_example1,
    "example2": gen_example2,
}
