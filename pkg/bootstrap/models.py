import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

WILD = "wild"
BINARY = "binary-model-based"
SCHEMES = (WILD, BINARY)


def critical_value(boot_stats: np.ndarray, alpha: float) -> float:
    """Order statistic ceil((1 - alpha) B) of the replicate statistics."""
    ordered = np.sort(boot_stats)
    rank = min(max(math.ceil((1 - alpha) * ordered.size - 1e-9), 1), ordered.size)
    return float(ordered[rank - 1])


def p_value(boot_stats: np.ndarray, t_n: float) -> float:
    return float(np.mean(boot_stats >= t_n))


@dataclass(frozen=True, eq=False)
class GofResult:
    t_n: float
    boot_stats: np.ndarray
    p_value: float
    critical_value: float
    alpha: float
    reject: bool
    scheme: str
    B: int
    seed: int | None
    p: int
    p_mode: str = "auto"
    redraws: int = 0

    def __post_init__(self):
        boot_stats = np.array(self.boot_stats, dtype=float)
        boot_stats.flags.writeable = False
        object.__setattr__(self, "boot_stats", boot_stats)

    @classmethod
    def from_draws(cls, t_n: float, boot_stats: np.ndarray, alpha: float, scheme: str,
                   seed: int | None, p: int, p_mode: str = "auto", redraws: int = 0) -> "GofResult":
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown bootstrap scheme {scheme!r}")
        boot_stats = np.asarray(boot_stats, dtype=float)
        pv = p_value(boot_stats, t_n)
        # ties between t_n and the critical value are settled by the p-value
        return cls(float(t_n), boot_stats, pv, critical_value(boot_stats, alpha), float(alpha),
                   bool(pv < alpha), scheme, int(boot_stats.size), seed, int(p), str(p_mode), int(redraws))

    def at_level(self, alpha: float) -> "GofResult":
        """Same replicates judged at another significance level."""
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        return replace(self, alpha=float(alpha), critical_value=critical_value(self.boot_stats, alpha),
                       reject=bool(self.p_value < alpha))

    def to_dict(self, include_boot_stats: bool = True) -> dict:
        data = {
            "t_n": self.t_n,
            "p_value": self.p_value,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "scheme": self.scheme,
            "B": self.B,
            "seed": self.seed,
            "p": self.p,
            "p_mode": self.p_mode,
            "redraws": self.redraws,
        }
        if include_boot_stats:
            data["boot_stats"] = self.boot_stats.tolist()
        return data

    def to_json(self, path: str | Path | None = None, include_boot_stats: bool = True) -> str:
        text = json.dumps(self.to_dict(include_boot_stats), indent=2)
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        return text
