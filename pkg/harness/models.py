import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import pandas as pd

from pagof_main import settings
from helper.exceptions import ConfigError
from funcdata.generators import GENERATORS

MIN_BOOTSTRAP = 100
DEFAULT_A_LISTS = {
    "example1": (0.0, 0.05, 0.1, 0.15, 0.2),
    "example2": (0.0, 0.25, 0.5, 0.75, 1.0),
}
CSV_COLUMNS = ["example", "n", "a", "alpha", "p_mode", "rate", "mc_se", "reps", "n_success", "n_failed", "valid"]


def normalize_p_mode(p_mode) -> str:
    """'auto', 'fixed:<k>' and a bare integer k are accepted; fixed modes come back as 'k'."""
    text = str(p_mode).strip().lower()
    if text == "auto":
        return text
    if text.startswith("fixed:"):
        text = text.split(":", 1)[1]
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"p mode must be 'auto' or 'fixed:<k>', got {p_mode!r}") from None
    if value < 1:
        raise ConfigError(f"fixed p must be positive, got {value}")
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    example: str
    n_list: tuple = tuple(settings.EXPERIMENT_N_LIST)
    a_list: tuple | None = None
    alpha_list: tuple = tuple(settings.EXPERIMENT_ALPHA_LIST)
    reps: int = settings.EXPERIMENT_REPS
    B: int = settings.EXPERIMENT_REPLICATES
    p_modes: tuple = tuple(settings.EXPERIMENT_P_MODES)
    seed: int = settings.EXPERIMENT_SEED
    output_path: str = settings.EXPERIMENT_OUTPUT
    n_jobs: int | None = None

    def __post_init__(self):
        if self.example not in GENERATORS:
            raise ConfigError(f"unknown example {self.example!r}; choose one of {sorted(GENERATORS)}")
        a_list = DEFAULT_A_LISTS[self.example] if self.a_list is None else self.a_list
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "a_list", tuple(float(a) for a in a_list))
        object.__setattr__(self, "alpha_list", tuple(float(alpha) for alpha in self.alpha_list))
        object.__setattr__(self, "p_modes", tuple(dict.fromkeys(normalize_p_mode(m) for m in self.p_modes)))
        object.__setattr__(self, "output_path", str(self.output_path))

        if self.reps < 1:
            raise ConfigError(f"reps must be at least 1, got {self.reps}")
        if self.B < MIN_BOOTSTRAP:
            raise ConfigError(f"B must be at least {MIN_BOOTSTRAP}, got {self.B}")
        if not self.n_list or min(self.n_list) < 3:
            raise ConfigError(f"every n must be at least 3, got {list(self.n_list)}")
        if not self.a_list or min(self.a_list) < 0:
            raise ConfigError(f"deviations a must be nonnegative, got {list(self.a_list)}")
        if not self.alpha_list or not all(0 < alpha < 1 for alpha in self.alpha_list):
            raise ConfigError(f"every alpha must lie in (0, 1), got {list(self.alpha_list)}")
        if not self.p_modes:
            raise ConfigError("at least one p mode is required")

    @property
    def family(self) -> str:
        return "gaussian" if self.example == "example1" else "bernoulli"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {item.name for item in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown experiment settings: {sorted(unknown)}")
        if "example" not in data:
            raise ConfigError("experiment config must name an example")
        try:
            return cls(**data)
        except (TypeError, ValueError) as error:
            raise ConfigError(f"invalid experiment config: {error}") from error

    @classmethod
    def from_settings(cls, example: str, **overrides) -> "ExperimentConfig":
        """Config built from the [experiment] defaults in config.ini."""
        return cls(example=example, **overrides)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as error:
            raise ConfigError(f"config file not found: {path}") from error
        except json.JSONDecodeError as error:
            raise ConfigError(f"config file {path} is not valid JSON: {error}") from error
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("n_list", "a_list", "alpha_list", "p_modes"):
            data[key] = list(data[key])
        return data


@dataclass(frozen=True)
class CellResult:
    example: str
    n: int
    a: float
    alpha: float
    p_mode: str
    rejections: int
    reps: int
    n_success: int
    n_failed: int
    valid: bool
    p_values: tuple = field(default=(), repr=False)

    @property
    def rate(self) -> float:
        return self.rejections / self.n_success if self.n_success else 0.0

    @property
    def mc_se(self) -> float:
        if not self.n_success:
            return 0.0
        return math.sqrt(self.rate * (1 - self.rate) / self.n_success)

    def to_row(self) -> dict:
        return {"example": self.example, "n": self.n, "a": self.a, "alpha": self.alpha, "p_mode": self.p_mode,
                "rate": self.rate, "mc_se": self.mc_se, "reps": self.reps, "n_success": self.n_success,
                "n_failed": self.n_failed, "valid": self.valid}


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    cells: tuple
    started_at: str
    elapsed_seconds: float
    version: str

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.to_row() for cell in self.cells], columns=CSV_COLUMNS)

    def rates_table(self) -> pd.DataFrame:
        """Rejection rates with (n, a) rows and (alpha, p_mode) columns, laid out like the power tables."""
        return self.to_frame().pivot_table(index=["n", "a"], columns=["alpha", "p_mode"], values="rate")

    def cell(self, n: int, a: float, alpha: float, p_mode="auto") -> CellResult:
        mode = normalize_p_mode(p_mode)
        for cell in self.cells:
            if (cell.n, cell.a, cell.alpha, cell.p_mode) == (n, float(a), float(alpha), mode):
                return cell
        raise KeyError((n, a, alpha, mode))

    def to_dict(self) -> dict:
        cells = []
        for cell in self.cells:
            row = cell.to_row()
            row["p_values"] = list(cell.p_values)
            cells.append(row)
        return {
            "version": self.version,
            "started_at": self.started_at,
            "elapsed_seconds": self.elapsed_seconds,
            "config": self.config.to_dict(),
            "csv_columns": CSV_COLUMNS,
            "cells": cells,
        }

    def write(self, output_path: str | Path | None = None) -> tuple[Path, Path]:
        """Writes <output_path>.csv and <output_path>.json."""
        base = Path(self.config.output_path if output_path is None else output_path)
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
        self.to_frame().to_csv(csv_path, index=False)
        json_path.write_text(json.dumps(self.to_dict(), indent=2))
        return csv_path, json_path
