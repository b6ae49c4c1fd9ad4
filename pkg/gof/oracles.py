"""
Monte Carlo checks of the projection-averaging identity. Neither function is
used by the test itself; they exist to validate it.
"""

import numpy as np

from helper.logger_setup import setup_logger
from helper.random_streams import RandomSource, as_generator
from gof.kernels import uniform_sphere_directions
from gof.models import CvmOracleResult
from gof.statistic import check_residuals, check_scores

logger = setup_logger('gof')

DIRECTION_CHUNK = 256


def cvm_projection_oracle(residuals, scores, n_directions: int = 20_000, rng: RandomSource = None,
                          chunk_size: int = DIRECTION_CHUNK) -> CvmOracleResult:
    """
    Average over random directions gamma of

        n^-3 sum_{i,j,k} e_i e_j I(gamma'X_i <= gamma'X_k) I(gamma'X_j <= gamma'X_k)

    With S_k = sum_i e_i I(P_i <= P_k) for projections P, the full sum is
    sum_k S_k^2 and the distinct-index part is
    sum_k (S_k^2 - Q_k - 2 e_k S_k + 2 e_k^2), Q_k = sum_i e_i^2 I(P_i <= P_k).
    """
    residuals = check_residuals(residuals)
    n = residuals.size
    scores = check_scores(scores, n)
    rng = as_generator(rng)
    squared = residuals ** 2

    full, distinct = 0.0, 0.0
    remaining = n_directions
    while remaining > 0:
        count = min(chunk_size, remaining)
        gamma = uniform_sphere_directions(count, scores.shape[1], rng)
        projections = gamma @ scores.T
        below = (projections[:, :, None] <= projections[:, None, :]).astype(float)
        s = np.einsum('i,mik->mk', residuals, below)
        q = np.einsum('i,mik->mk', squared, below)
        full += float(np.sum(s ** 2))
        distinct += float(np.sum(s ** 2 - q - 2 * residuals * s + 2 * squared))
        remaining -= count

    scale = n_directions * n ** 3
    v_statistic, distinct_part = full / scale, distinct / scale
    tn_equivalent = 2 * np.pi * n ** 3 / (n * (n - 1) * (n - 2)) * distinct_part if n >= 3 else 0.0
    logger.debug(f"cvm oracle: n={n}, M={n_directions}, V={v_statistic:.6g}, T_n equivalent={tn_equivalent:.6g}")
    return CvmOracleResult(v_statistic, distinct_part, v_statistic - distinct_part, float(tn_equivalent),
                           n_directions)


def conditional_moment_probe(scores, residuals, n_directions: int = 1000, rng: RandomSource = None) -> float:
    """max over sampled gamma and thresholds x = gamma'X_k of |n^-1 sum_i e_i I(gamma'X_i <= x)|."""
    residuals = check_residuals(residuals)
    n = residuals.size
    scores = check_scores(scores, n)
    gamma = uniform_sphere_directions(n_directions, scores.shape[1], as_generator(rng))
    projections = gamma @ scores.T
    order = np.argsort(projections, axis=1, kind='stable')
    ordered = np.take_along_axis(projections, order, axis=1)
    partial_sums = np.cumsum(residuals[order], axis=1)
    # only the last index of a tie group is a valid threshold
    last_of_group = np.ones_like(ordered, dtype=bool)
    last_of_group[:, :-1] = ordered[:, 1:] != ordered[:, :-1]
    return float(np.max(np.abs(partial_sums[last_of_group])) / n)
