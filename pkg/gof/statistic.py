"""
Projection-averaged U-statistic

    T_n = [n(n-1)(n-2)]^-1  sum_{i != j != k}  e_i e_j Ang(X_i - X_k, X_k - X_j)

over FPCA score vectors X_i. The residual-free part of the sum is the n x n
angle kernel K[i, j] = sum_{k not in {i, j}} Ang(X_i - X_k, X_k - X_j), so
T_n = e' K e / [n(n-1)(n-2)] and bootstrap replicates only need new residuals.
"""

import joblib
import numpy as np

from pagof_main import settings
from helper.exceptions import DegeneratePairError, DimensionError
from helper.logger_setup import setup_logger
from funcdata.models import require_triples
from gof.kernels import angle
from gof.models import GofStatistic

logger = setup_logger('gof')


def check_scores(scores, n: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    if scores.ndim != 2 or scores.shape[0] != n:
        raise DimensionError(f"scores must be an n x p matrix with n={n}, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise DimensionError("scores contain non-finite values")
    return scores


def check_residuals(residuals) -> np.ndarray:
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 1:
        raise DimensionError(f"residuals must be a vector, got shape {residuals.shape}")
    if not np.all(np.isfinite(residuals)):
        raise DimensionError("residuals contain non-finite values")
    return residuals


def _kernel_chunk(scores: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Partial kernel summed over the pivot indices in centers, in order."""
    n = scores.shape[0]
    partial = np.zeros((n, n))
    for k in centers:
        # rows are X_i - X_k; the second argument of Ang is -(X_j - X_k)
        diffs = scores - scores[k]
        norms = np.sqrt(np.einsum('ij,ij->i', diffs, diffs))
        valid = norms > 0
        cosine = np.zeros((n, n))
        sub = diffs[valid]
        cosine[np.ix_(valid, valid)] = -(sub @ sub.T) / np.outer(norms[valid], norms[valid])
        angles = np.arccos(np.clip(cosine, -1.0, 1.0))
        angles[~valid, :] = 0.0
        angles[:, ~valid] = 0.0
        partial += angles
    return partial


def angle_kernel_matrix(scores, n_jobs: int | None = None, chunk_size: int | None = None) -> np.ndarray:
    """
    Symmetric n x n kernel with zero diagonal. Pivots whose difference vector
    vanishes (ties X_i = X_k) contribute 0. Chunks over the pivot index run
    through joblib and are reduced in pivot order, so the result does not
    depend on n_jobs.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim == 1:
        scores = scores[:, None]
    n = scores.shape[0]
    require_triples(n)
    n_jobs = settings.N_JOBS if n_jobs is None else n_jobs
    chunk_size = settings.KERNEL_CHUNK_SIZE if chunk_size is None else chunk_size
    chunks = [np.arange(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]

    partials = joblib.Parallel(n_jobs=n_jobs)(
        joblib.delayed(_kernel_chunk)(scores, centers) for centers in chunks
    )
    kernel = np.zeros((n, n))
    for partial in partials:
        kernel += partial
    np.fill_diagonal(kernel, 0.0)
    return kernel


def tn_from_kernel(kernel: np.ndarray, residuals) -> float:
    residuals = check_residuals(residuals)
    n = residuals.size
    if kernel.shape != (n, n):
        raise DimensionError(f"kernel shape {kernel.shape} does not match {n} residuals")
    require_triples(n)
    return float(residuals @ kernel @ residuals / (n * (n - 1) * (n - 2)))


def compute_tn(residuals, scores, n_jobs: int | None = None, chunk_size: int | None = None) -> GofStatistic:
    residuals = check_residuals(residuals)
    n = residuals.size
    require_triples(n)
    scores = check_scores(scores, n)
    kernel = angle_kernel_matrix(scores, n_jobs=n_jobs, chunk_size=chunk_size)
    t_n = tn_from_kernel(kernel, residuals)
    logger.debug(f"T_n={t_n:.6g} for n={n}, p={scores.shape[1]}")
    return GofStatistic(t_n, n, scores.shape[1], residuals, scores)


def brute_force_tn(residuals, scores) -> float:
    """Direct enumeration of the ordered distinct triples. Reference only: O(n^3 p)."""
    residuals = check_residuals(residuals)
    n = residuals.size
    require_triples(n)
    scores = check_scores(scores, n)
    total = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i == j or j == k or i == k:
                    continue
                try:
                    theta = angle(scores[i] - scores[k], scores[k] - scores[j])
                except DegeneratePairError:
                    continue
                total += residuals[i] * residuals[j] * theta
    return total / (n * (n - 1) * (n - 2))
