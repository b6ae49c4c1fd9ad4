"""
Exponential-family log-likelihoods l(y; a) in the linear predictor a.

Each family exposes the mean function F, the score l'_a, the IRLS weight
-l''_a, the unit deviance and its dispersion a(phi). All three links are
canonical, so the score is (y - F(a)) / a(phi). Families with a known scale
are smoothed by UBRE, the gaussian family by GCV.
"""

from abc import ABC, abstractmethod

import numpy as np
from scipy.special import expit, logit, xlogy

from helper.exceptions import UnsupportedFamilyError

ETA_LIMIT = 700.0


class Family(ABC):
    name: str
    link: str
    known_scale = True

    def __init__(self, dispersion: float = 1.0):
        if dispersion <= 0:
            raise ValueError(f"dispersion must be positive, got {dispersion}")
        self.dispersion = float(dispersion)

    @property
    def kind(self) -> str:
        return f"{self.name}-{self.link}"

    def __repr__(self):
        return f"{type(self).__name__}(dispersion={self.dispersion})"

    @abstractmethod
    def mean(self, eta: np.ndarray) -> np.ndarray:
        """F(eta)."""

    @abstractmethod
    def mean_derivative(self, eta: np.ndarray) -> np.ndarray:
        """F'(eta)."""

    @abstractmethod
    def loglik(self, y: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Pointwise l(y; eta), constants in eta dropped."""

    @abstractmethod
    def link_function(self, mu: np.ndarray) -> np.ndarray:
        """F^-1(mu), used for starting values."""

    def score(self, y: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return (y - self.mean(eta)) / self.dispersion

    def weight(self, eta: np.ndarray) -> np.ndarray:
        return self.mean_derivative(eta) / self.dispersion

    @abstractmethod
    def deviance(self, y: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Pointwise unscaled deviance, zero at a saturated fit."""

    def starting_mean(self, y: np.ndarray) -> float:
        return float(np.mean(y))

    def saturated(self, eta: np.ndarray, tol: float) -> np.ndarray:
        """Observations whose fitted mean sits on the boundary of the support."""
        return np.zeros(np.shape(eta), dtype=bool)


class GaussianIdentity(Family):
    name, link = "gaussian", "identity"
    known_scale = False

    def mean(self, eta):
        return np.asarray(eta, dtype=float)

    def mean_derivative(self, eta):
        return np.ones_like(np.asarray(eta, dtype=float))

    def loglik(self, y, eta):
        return -0.5 * (y - eta) ** 2 / self.dispersion

    def deviance(self, y, eta):
        return (y - eta) ** 2

    def link_function(self, mu):
        return np.asarray(mu, dtype=float)


class BernoulliLogit(Family):
    name, link = "bernoulli", "logit"

    def mean(self, eta):
        return expit(eta)

    def mean_derivative(self, eta):
        mu = expit(eta)
        return mu * (1 - mu)

    def loglik(self, y, eta):
        return (y * eta - np.logaddexp(0.0, eta)) / self.dispersion

    def deviance(self, y, eta):
        return 2 * (y * np.logaddexp(0.0, -eta) + (1 - y) * np.logaddexp(0.0, eta))

    def link_function(self, mu):
        return logit(mu)

    def starting_mean(self, y):
        return float(np.clip(np.mean(y), 0.01, 0.99))

    def saturated(self, eta, tol):
        mu = self.mean(eta)
        return (mu < tol) | (mu > 1 - tol)


class PoissonLog(Family):
    name, link = "poisson", "log"

    def mean(self, eta):
        return np.exp(np.minimum(eta, ETA_LIMIT))

    def mean_derivative(self, eta):
        return self.mean(eta)

    def loglik(self, y, eta):
        return (y * eta - self.mean(eta)) / self.dispersion

    def deviance(self, y, eta):
        mu = self.mean(eta)
        return 2 * (xlogy(y, y) - y * np.minimum(eta, ETA_LIMIT) - (y - mu))

    def link_function(self, mu):
        return np.log(mu)

    def starting_mean(self, y):
        return float(max(np.mean(y), 0.1))


FAMILIES = {
    "gaussian": GaussianIdentity,
    "bernoulli": BernoulliLogit,
    "poisson": PoissonLog,
}


def get_family(family: "str | Family", **kwargs) -> Family:
    """Accepts 'gaussian', 'gaussian-identity', 'bernoulli-logit', ... or an instance."""
    if isinstance(family, Family):
        return family
    name = str(family).strip().lower()
    for key, cls in FAMILIES.items():
        if name in (key, f"{key}-{cls.link}"):
            return cls(**kwargs)
    raise UnsupportedFamilyError(
        f"family '{family}' is not supported; choose one of {[c.name + '-' + c.link for c in FAMILIES.values()]}")
