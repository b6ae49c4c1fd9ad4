import json
from pathlib import Path

import jsonschema
import pandas as pd
import pytest

from pagof_main import settings
from helper.exceptions import ConfigError, NumericalError
from harness import runner
from harness.models import CSV_COLUMNS, DEFAULT_A_LISTS, CellResult, ExperimentConfig, normalize_p_mode
from harness.runner import run_experiment

SCHEMA = json.loads((Path(__file__).with_name("report_schema.json")).read_text())


@pytest.fixture
def tiny_config(tmp_path):
    return ExperimentConfig(example="example1", n_list=(20,), a_list=(0.0,), alpha_list=(0.05, 0.1),
                            reps=2, B=100, p_modes=("auto", "fixed:3"), seed=7,
                            output_path=str(tmp_path / "tiny"), n_jobs=1)


@pytest.mark.parametrize("overrides", [
    {"example": "example3"},
    {"reps": 0},
    {"B": 50},
    {"alpha_list": (0.05, 1.5)},
    {"a_list": (-0.1,)},
    {"n_list": (2,)},
    {"p_modes": ("sometimes",)},
])
def test_invalid_configs(overrides):
    data = {"example": "example1", **overrides}
    with pytest.raises(ConfigError):
        ExperimentConfig(**data)


def test_default_deviation_grids():
    assert ExperimentConfig.from_settings("example1").a_list == DEFAULT_A_LISTS["example1"]
    assert ExperimentConfig.from_settings("example1").reps == settings.EXPERIMENT_REPS
    assert ExperimentConfig(example="example2").a_list == DEFAULT_A_LISTS["example2"]
    assert ExperimentConfig(example="example2").family == "bernoulli"


@pytest.mark.parametrize("mode, expected", [("auto", "auto"), ("AUTO", "auto"), ("fixed:5", "5"), (10, "10")])
def test_p_mode_normalization(mode, expected):
    assert normalize_p_mode(mode) == expected


def test_config_from_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"example": "example2", "reps": 3, "B": 200, "p_modes": ["auto", "fixed:5"]}))
    config = ExperimentConfig.from_json(path)
    assert config.reps == 3 and config.B == 200 and config.p_modes == ("auto", "5")
    assert config.with_overrides(seed=11, reps=None).seed == 11


@pytest.mark.parametrize("content", ["{not json", json.dumps({"example": "example1", "colour": "red"}),
                                     json.dumps([1, 2])])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / "config.json"
    path.write_text(content)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "absent.json")


def test_tiny_experiment_report(tiny_config):
    report = run_experiment(tiny_config)
    frame = pd.read_csv(Path(tiny_config.output_path).with_suffix(".csv"))
    assert list(frame.columns) == CSV_COLUMNS
    assert len(frame) == 4
    assert frame["rate"].between(0, 1).all()
    for cell in report.cells:
        assert cell.mc_se == pytest.approx((cell.rate * (1 - cell.rate) / cell.n_success) ** 0.5)
        assert cell.n_success + cell.n_failed == 2

    document = json.loads(Path(tiny_config.output_path).with_suffix(".json").read_text())
    jsonschema.validate(document, SCHEMA)
    assert report.rates_table().shape == (1, 4)


def test_experiment_is_reproducible(tiny_config, tmp_path):
    first = run_experiment(tiny_config)
    second = run_experiment(tiny_config.with_overrides(output_path=str(tmp_path / "again"), n_jobs=2))
    assert first.to_frame().equals(second.to_frame())
    assert [cell.p_values for cell in first.cells] == [cell.p_values for cell in second.cells]
    csv_first = Path(tiny_config.output_path).with_suffix(".csv").read_bytes()
    assert csv_first == (tmp_path / "again.csv").read_bytes()


def test_failed_replications_invalidate_cell(tiny_config, monkeypatch):
    def broken(*args, **kwargs):
        raise NumericalError("singular system")

    monkeypatch.setattr(runner, "fit_gflm", broken)
    report = run_experiment(tiny_config, write=False)
    assert all(not cell.valid and cell.n_failed == 2 and cell.rate == 0.0 for cell in report.cells)


def test_cell_lookup(tiny_config):
    report = run_experiment(tiny_config, write=False)
    assert report.cell(20, 0.0, 0.05, "fixed:3").p_mode == "3"
    with pytest.raises(KeyError):
        report.cell(50, 0.0, 0.05)


def test_rate_and_standard_error_share_the_successful_count():
    cell = CellResult("example1", 100, 0.0, 0.05, "auto", rejections=5, reps=100, n_success=50,
                      n_failed=50, valid=False)
    assert cell.rate == pytest.approx(0.1)
    assert cell.mc_se == pytest.approx((0.1 * 0.9 / 50) ** 0.5)
    empty = CellResult("example1", 100, 0.0, 0.05, "auto", rejections=0, reps=10, n_success=0,
                       n_failed=10, valid=False)
    assert empty.rate == 0.0 and empty.mc_se == 0.0
