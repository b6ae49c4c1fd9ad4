import numpy as np

from helper.exceptions import DegeneratePairError
from helper.random_streams import RandomSource, as_generator


def angle(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between u and v in [0, pi]."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    norm_u, norm_v = np.linalg.norm(u), np.linalg.norm(v)
    if norm_u == 0 or norm_v == 0:
        raise DegeneratePairError("angle is undefined for a zero vector")
    return float(np.arccos(np.clip(u @ v / (norm_u * norm_v), -1.0, 1.0)))


def sphere_overlap_closed_form(u: np.ndarray, v: np.ndarray) -> float:
    """Uniform-sphere measure of {gamma: gamma'u <= 0, gamma'v <= 0}."""
    return 0.5 - angle(u, v) / (2 * np.pi)


def uniform_sphere_directions(count: int, dimension: int, rng: RandomSource = None) -> np.ndarray:
    """count x dimension matrix of directions uniform on the unit sphere."""
    rng = as_generator(rng)
    directions = rng.standard_normal((count, dimension))
    norms = np.linalg.norm(directions, axis=1)
    while np.any(norms == 0):
        zero = norms == 0
        directions[zero] = rng.standard_normal((int(zero.sum()), dimension))
        norms = np.linalg.norm(directions, axis=1)
    return directions / norms[:, None]


def sphere_overlap_monte_carlo(u: np.ndarray, v: np.ndarray, n_directions: int = 100_000,
                               rng: RandomSource = None) -> tuple[float, float]:
    """Monte Carlo estimate of the overlap and its standard error."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    gamma = uniform_sphere_directions(n_directions, u.size, rng)
    hits = (gamma @ u <= 0) & (gamma @ v <= 0)
    estimate = float(hits.mean())
    return estimate, float(np.sqrt(estimate * (1 - estimate) / n_directions))
