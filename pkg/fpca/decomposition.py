import warnings

import numpy as np
from scipy import linalg

from pagof_main import settings
from helper.exceptions import DegenerateSampleError, DimensionError, RankDeficiencyWarning
from helper.logger_setup import setup_logger
from funcdata.models import FunctionalSample
from fpca.models import FpcaBasis

logger = setup_logger('fpca')

RANK_TOL = 1e-12


def _orient(eigenvectors: np.ndarray) -> np.ndarray:
    """Flip each row so its entry of largest magnitude is positive."""
    pivots = np.argmax(np.abs(eigenvectors), axis=1)
    signs = np.sign(eigenvectors[np.arange(eigenvectors.shape[0]), pivots])
    signs[signs == 0] = 1.0
    return eigenvectors * signs[:, None]


def fit_fpca(sample: FunctionalSample, p_max: int | None = None) -> FpcaBasis:
    """
    Eigen-decomposition of the centered covariance operator under the grid
    quadrature.

    The T x T matrix W^1/2 C W^1/2 equals G^T G / n for the weighted centered
    data G = (X - mean) W^1/2, so its eigenpairs come from the thin SVD of G.
    Eigenvectors are mapped back with W^-1/2, which makes the eigenfunctions
    orthonormal in the quadrature inner product.
    """
    n, size = sample.values.shape
    if n < 2:
        raise DimensionError(f"FPCA needs at least 2 curves, got {n}")
    limit = min(n - 1, size)
    if p_max is None:
        p_max = limit
    if not 1 <= p_max <= limit:
        raise DimensionError(f"p_max must lie in [1, {limit}], got {p_max}")

    weights = sample.grid.weights
    root = np.sqrt(weights)
    mean = sample.values.mean(axis=0)
    centered = sample.values - mean
    _, singular, vt = linalg.svd(centered * root, full_matrices=False)

    spectrum = singular ** 2 / n
    total = spectrum.sum()
    rank = int(np.sum(spectrum > RANK_TOL * spectrum[0])) if total > 0 else 0

    eigenvalues = spectrum[:p_max].copy()
    if rank < p_max:
        message = f"sample covariance has rank {rank} < {p_max}; trailing eigenvalues set to 0"
        logger.warning(message)
        warnings.warn(message, RankDeficiencyWarning, stacklevel=2)
        eigenvalues[rank:] = 0.0

    eigenfunctions = _orient(vt[:p_max]) / root
    scores = centered @ (eigenfunctions * weights).T
    ratio = eigenvalues / total if total > 0 else np.zeros_like(eigenvalues)
    logger.debug(f"fpca: n={n}, T={size}, p_max={p_max}, rank={rank}, leading={eigenvalues[:3]}")
    return FpcaBasis(sample.grid, mean, eigenfunctions, eigenvalues, ratio, scores, rank)


def select_p(basis: FpcaBasis, threshold: float | None = None) -> int:
    """Smallest p whose cumulative explained-variance ratio reaches threshold."""
    if threshold is None:
        threshold = settings.VARIANCE_THRESHOLD
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    if not np.any(basis.eigenvalues > 0):
        raise DegenerateSampleError("all eigenvalues are zero; explained variance is undefined")
    cumulative = np.cumsum(basis.explained_variance_ratio)
    reached = np.flatnonzero(cumulative >= threshold - 1e-12)
    if reached.size == 0:
        return basis.p
    return int(reached[0]) + 1


def basis_from_eigenvalues(grid, eigenvalues) -> FpcaBasis:
    """Scoreless basis carrying only a spectrum, for selection rules and diagnostics."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    total = eigenvalues.sum()
    ratio = eigenvalues / total if total > 0 else np.zeros_like(eigenvalues)
    p = eigenvalues.size
    return FpcaBasis(grid, np.zeros(len(grid)), np.zeros((p, len(grid))),
                     eigenvalues, ratio, np.zeros((0, p)), int(np.sum(eigenvalues > 0)))


def resolve_p(basis: FpcaBasis, p_mode: "str | int", threshold: float | None = None) -> int:
    """'auto' applies select_p; an integer (or 'fixed:<k>') is used as is."""
    if isinstance(p_mode, str):
        mode = p_mode.strip().lower()
        if mode == "auto":
            return select_p(basis, threshold)
        if mode.startswith("fixed:"):
            mode = mode.split(":", 1)[1]
        p_mode = int(mode)
    if not 1 <= p_mode <= basis.p:
        raise DimensionError(f"fixed p={p_mode} exceeds the {basis.p} available components")
    return int(p_mode)
