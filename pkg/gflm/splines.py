import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline


def bspline_knots(points: np.ndarray, basis_size: int, degree: int = 3) -> np.ndarray:
    """Clamped knot vector with interior knots at quantiles of points."""
    n_interior = basis_size - degree - 1
    if n_interior < 0:
        raise ValueError(f"basis_size must be at least {degree + 1}, got {basis_size}")
    lower, upper = float(points[0]), float(points[-1])
    interior = np.quantile(points, np.linspace(0, 1, n_interior + 2)[1:-1])
    return np.concatenate([np.full(degree + 1, lower), interior, np.full(degree + 1, upper)])


def bspline_design(x: np.ndarray, knots: np.ndarray, degree: int = 3, deriv: int = 0) -> np.ndarray:
    """len(x) x basis_size matrix of B-spline values (or derivatives)."""
    basis_size = len(knots) - degree - 1
    spline = BSpline(knots, np.eye(basis_size), degree, extrapolate=False)
    if deriv:
        spline = spline.derivative(deriv)
    values = spline(np.clip(x, knots[degree], knots[-degree - 1]))
    return np.nan_to_num(values)


def penalty_matrix(knots: np.ndarray, degree: int = 3, order: int = 2) -> np.ndarray:
    """
    Gram matrix of the order-th derivatives, J[a, b] = int B_a^(m) B_b^(m).

    Gauss-Legendre with degree + 1 nodes per knot interval is exact for the
    piecewise polynomial integrand.
    """
    if order < 1:
        raise ValueError(f"penalty order must be at least 1, got {order}")
    basis_size = len(knots) - degree - 1
    if order > degree:
        return np.zeros((basis_size, basis_size))
    breaks = np.unique(knots)
    nodes, node_weights = leggauss(degree + 1)
    left, right = breaks[:-1, None], breaks[1:, None]
    x = ((right - left) * nodes + (right + left)) / 2
    w = (right - left) / 2 * node_weights
    derivative = bspline_design(x.ravel(), knots, degree, deriv=order)
    gram = (derivative * w.ravel()[:, None]).T @ derivative
    return (gram + gram.T) / 2
