import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from funcdata.models import Curve


@dataclass(frozen=True, eq=False)
class GflmFit:
    family: str
    alpha: float
    beta_coefs: np.ndarray
    beta_curve: Curve
    lam: float
    penalty_order: int
    eta: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    converged: bool
    iterations: int
    edf: float
    rss_weighted: float
    gcv: float
    dispersion: float
    roughness: float = 0.0
    separated: bool = False
    gradient_norm: float = 0.0
    criterion: str = "gcv"
    criterion_score: float = float("nan")
    lambda_path: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("beta_coefs", "eta", "fitted", "residuals"):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def n(self) -> int:
        return self.residuals.size

    @property
    def coefficients(self) -> np.ndarray:
        """Intercept followed by the spline coefficients."""
        return np.concatenate([[self.alpha], self.beta_coefs])

    def to_dict(self, curve_samples: int = 101) -> dict:
        grid = self.beta_curve.grid
        t = np.linspace(grid.points[0], grid.points[-1], curve_samples)
        return {
            "family": self.family,
            "alpha": float(self.alpha),
            "lambda": float(self.lam),
            "penalty_order": int(self.penalty_order),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "separated": bool(self.separated),
            "edf": float(self.edf),
            "gcv": float(self.gcv),
            "criterion": self.criterion,
            "criterion_score": float(self.criterion_score),
            "dispersion": float(self.dispersion),
            "roughness": float(self.roughness),
            "beta_coefs": self.beta_coefs.tolist(),
            "beta_curve": {"t": t.tolist(), "value": self.beta_curve(t).tolist()},
        }

    def to_json(self, path: str | Path | None = None, curve_samples: int = 101) -> str:
        text = json.dumps(self.to_dict(curve_samples), indent=2)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        return text
