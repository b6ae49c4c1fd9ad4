from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GofStatistic:
    t_n: float
    n: int
    p: int
    residuals: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        for name in ("residuals", "scores"):
            array = np.array(getattr(self, name), dtype=float)
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    def recompute(self) -> float:
        from gof.statistic import compute_tn
        return compute_tn(self.residuals, self.scores).t_n


@dataclass(frozen=True)
class CvmOracleResult:
    """
    Monte Carlo version of the projected Cramer-von Mises V-statistic.

    v_statistic = n^-3 sum over all (i, j, k); distinct_part keeps the triples
    with i, j, k distinct and diagonal_part the rest. tn_equivalent rescales
    distinct_part to the U-statistic T_n, which it matches up to Monte Carlo
    error.
    """
    v_statistic: float
    distinct_part: float
    diagonal_part: float
    tn_equivalent: float
    n_directions: int
