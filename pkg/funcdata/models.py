from dataclasses import dataclass, field

import numpy as np

from helper.exceptions import DimensionError, InvalidSizeError

RESPONSE_FAMILIES = ("gaussian", "bernoulli", "poisson")


def _frozen(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.flags.writeable = False
    return array


def trapezoid_weights(points: np.ndarray) -> np.ndarray:
    """Weights w with sum(w * f) equal to the trapezoidal rule for f on points."""
    gaps = np.diff(points)
    weights = np.zeros_like(points, dtype=float)
    weights[:-1] += gaps / 2
    weights[1:] += gaps / 2
    return weights


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 2:
            raise DimensionError(f"grid needs at least 2 points, got shape {points.shape}")
        if not np.all(np.diff(points) > 0):
            raise DimensionError("grid points must be strictly increasing")
        if points[0] < 0 or points[-1] > 1:
            raise DimensionError(f"grid must lie in [0, 1], got [{points[0]}, {points[-1]}]")
        weights = trapezoid_weights(points) if self.weights is None else np.asarray(self.weights, dtype=float)
        if weights.shape != points.shape:
            raise DimensionError("one quadrature weight per grid point is required")
        if np.any(weights <= 0):
            raise DimensionError("quadrature weights must be positive")
        if abs(weights.sum() - (points[-1] - points[0])) > 1e-12:
            raise DimensionError("quadrature weights must sum to the grid length")
        object.__setattr__(self, "points", _frozen(points))
        object.__setattr__(self, "weights", _frozen(weights))

    @classmethod
    def uniform(cls, size: int = 1000, start: float = 0.0, stop: float = 1.0) -> "Grid":
        return cls(np.linspace(start, stop, size))

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.weights, other.weights)

    __hash__ = None

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Quadrature of values along the last axis."""
        return np.asarray(values, dtype=float) @ self.weights


@dataclass(frozen=True, eq=False)
class Curve:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise DimensionError(f"curve has {values.size} values for a grid of {len(self.grid)} points")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_function(cls, grid: Grid, function) -> "Curve":
        return cls(grid, function(grid.points))

    def __call__(self, t):
        return np.interp(t, self.grid.points, self.values)


@dataclass(frozen=True, eq=False)
class FunctionalSample:
    grid: Grid
    values: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[1] != len(self.grid):
            raise DimensionError(
                f"curves have {values.shape[1]} points but the grid has {len(self.grid)}")
        if not np.all(np.isfinite(values)):
            raise DimensionError("curve values must be finite")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "n", values.shape[0])

    def __len__(self):
        return self.n

    def curve(self, i: int) -> Curve:
        return Curve(self.grid, self.values[i])

    def mean_curve(self) -> Curve:
        return Curve(self.grid, self.values.mean(axis=0))

    def inner_products(self, other: Curve | np.ndarray) -> np.ndarray:
        """Vector of <X_i, g> for every curve."""
        if isinstance(other, Curve):
            if other.grid != self.grid:
                raise DimensionError("curve lives on a different grid")
            other = other.values
        other = np.asarray(other, dtype=float)
        if other.shape[-1] != len(self.grid):
            raise DimensionError(f"expected {len(self.grid)} values, got {other.shape[-1]}")
        return (self.values * self.grid.weights) @ other.T

    def squared_norms(self) -> np.ndarray:
        return self.grid.integrate(self.values ** 2)

    def shifted(self, curve: Curve | np.ndarray) -> "FunctionalSample":
        shift = curve.values if isinstance(curve, Curve) else np.asarray(curve, dtype=float)
        return FunctionalSample(self.grid, self.values + shift)


@dataclass(frozen=True, eq=False)
class ScalarResponse:
    values: np.ndarray
    family: str = "gaussian"

    def __post_init__(self):
        family = self.family.split("-")[0]
        if family not in RESPONSE_FAMILIES:
            raise DimensionError(f"unknown response family '{self.family}'")
        values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise DimensionError("response values must be finite")
        if family == "bernoulli" and not np.all(np.isin(values, (0.0, 1.0))):
            raise DimensionError("bernoulli responses must be 0 or 1")
        if family == "poisson" and (np.any(values < 0) or not np.all(values == np.floor(values))):
            raise DimensionError("poisson responses must be nonnegative integers")
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self):
        return self.values.size


def inner_product(f: Curve, g: Curve) -> float:
    """Quadrature approximation of the L2 inner product of two curves."""
    if f.grid != g.grid:
        raise DimensionError("curves are not observed on the same grid")
    return float(np.sum(f.grid.weights * f.values * g.values))


def require_triples(n: int) -> None:
    if n < 3:
        raise InvalidSizeError(f"at least 3 observations are needed, got n={n}")
