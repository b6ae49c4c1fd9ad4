from pathlib import Path

import numpy as np
import pandas as pd

from helper.exceptions import DimensionError, InputFormatError
from funcdata.models import Curve, FunctionalSample, Grid, ScalarResponse

FLOAT_FORMAT = '%.17g'


def write_sample_csv(sample: FunctionalSample, path: str | Path) -> Path:
    """First row holds the grid points, every further row one curve."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(np.vstack([sample.grid.points, sample.values]))
    table.to_csv(path, header=False, index=False, float_format=FLOAT_FORMAT)
    return path


def read_sample_csv(path: str | Path) -> FunctionalSample:
    try:
        table = pd.read_csv(path, header=None, float_precision='round_trip').to_numpy(dtype=float)
    except (OSError, ValueError, pd.errors.ParserError) as exc:
        raise InputFormatError(f"cannot read curves from {path}: {exc}") from exc
    if table.shape[0] < 2:
        raise InputFormatError(f"{path} must hold a grid row followed by at least one curve")
    try:
        return FunctionalSample(Grid(table[0]), table[1:])
    except DimensionError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def write_response_csv(response: ScalarResponse, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({'y': response.values}).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_response_csv(path: str | Path, family: str = "gaussian") -> ScalarResponse:
    try:
        table = pd.read_csv(path, float_precision='round_trip')
    except (OSError, ValueError, pd.errors.ParserError) as exc:
        raise InputFormatError(f"cannot read responses from {path}: {exc}") from exc
    if table.shape[1] != 1:
        raise InputFormatError(f"{path} must have exactly one column, found {table.shape[1]}")
    try:
        return ScalarResponse(table.iloc[:, 0].to_numpy(dtype=float), family)
    except (DimensionError, ValueError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def write_curve_csv(curve: Curve, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({'t': curve.grid.points, 'value': curve.values}).to_csv(
        path, index=False, float_format=FLOAT_FORMAT)
    return path
