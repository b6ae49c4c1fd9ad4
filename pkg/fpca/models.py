from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from funcdata.models import Grid


@dataclass(frozen=True, eq=False)
class FpcaBasis:
    """
    Leading eigenpairs of the sample covariance operator.

    eigenfunctions is p x T (one row per eigenfunction on the grid), scores is
    n x p with row i equal to (<X_i - mean, psi_1>, ..., <X_i - mean, psi_p>).
    explained_variance_ratio is relative to the whole spectrum, so it does not
    sum to one once the basis is truncated.
    """
    grid: Grid
    mean: np.ndarray
    eigenfunctions: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    scores: np.ndarray
    rank: int

    def __post_init__(self):
        for name in ("mean", "eigenfunctions", "eigenvalues", "explained_variance_ratio", "scores"):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def p(self) -> int:
        return self.eigenvalues.size

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    def truncate(self, p: int) -> "FpcaBasis":
        if not 1 <= p <= self.p:
            raise ValueError(f"cannot keep {p} of {self.p} components")
        return FpcaBasis(self.grid, self.mean, self.eigenfunctions[:p], self.eigenvalues[:p],
                         self.explained_variance_ratio[:p], self.scores[:, :p], min(self.rank, p))

    def reconstruct(self) -> np.ndarray:
        """Curves rebuilt from scores, mean added back."""
        return self.mean + self.scores @ self.eigenfunctions

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        table = pd.DataFrame(self.eigenfunctions, columns=[f"{t:.6g}" for t in self.grid.points])
        table.insert(0, "explained_variance_ratio", self.explained_variance_ratio)
        table.insert(0, "eigenvalue", self.eigenvalues)
        table.to_csv(path, index_label="component")
        return path
