"""
Desk-scale size and power studies. Each takes minutes on a multicore machine;
run them with `pytest -m slow`.
"""

from itertools import combinations

import numpy as np
import pytest
from scipy.stats import kstest

from harness.models import ExperimentConfig
from harness.runner import run_experiment

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def example1_report(tmp_path_factory):
    config = ExperimentConfig(example="example1", n_list=(100,), a_list=(0.0, 0.05, 0.1, 0.15, 0.2),
                              alpha_list=(0.05,), reps=200, B=500, p_modes=("auto", "5", "10"),
                              seed=20250101, output_path=str(tmp_path_factory.mktemp("calibration") / "ex1"),
                              n_jobs=-1)
    return run_experiment(config)


def test_example1_size(example1_report):
    cell = example1_report.cell(100, 0.0, 0.05)
    assert cell.valid
    assert 0.01 <= cell.rate <= 0.09


def test_example1_power_grows_with_deviation(example1_report):
    cells = [example1_report.cell(100, a, 0.05) for a in (0.0, 0.05, 0.1, 0.15, 0.2)]
    assert cells[-1].rate >= 0.85
    for lower, upper in zip(cells, cells[1:]):
        assert upper.rate >= lower.rate - 2 * max(lower.mc_se, upper.mc_se)


def test_example1_power_is_robust_to_p(example1_report):
    rates = [example1_report.cell(100, 0.2, 0.05, mode).rate for mode in ("auto", "5", "10")]
    for first, second in combinations(rates, 2):
        assert abs(first - second) <= 0.06


def test_example2_size_and_power(tmp_path):
    config = ExperimentConfig(example="example2", n_list=(100,), a_list=(0.0, 1.0), alpha_list=(0.05,),
                              reps=200, B=500, p_modes=("auto",), seed=20250102,
                              output_path=str(tmp_path / "ex2"), n_jobs=-1)
    report = run_experiment(config)
    assert 0.01 <= report.cell(100, 0.0, 0.05).rate <= 0.09
    assert report.cell(100, 1.0, 0.05).rate >= 0.95


def test_null_p_values_are_uniform(tmp_path):
    config = ExperimentConfig(example="example1", n_list=(100,), a_list=(0.0,), alpha_list=(0.05,),
                              reps=500, B=500, p_modes=("auto",), seed=777,
                              output_path=str(tmp_path / "uniform"), n_jobs=-1)
    p_values = np.array(run_experiment(config).cell(100, 0.0, 0.05).p_values)
    assert kstest(p_values, "uniform").statistic <= 0.08
