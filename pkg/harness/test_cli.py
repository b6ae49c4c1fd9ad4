import json

import pandas as pd
from click.testing import CliRunner

from helper.exceptions import NumericalError
from harness import cli as cli_module
from harness.cli import cli, main


def test_version():
    result = CliRunner().invoke(cli, ["--version"])
    assert result.exit_code == 0 and "pagof" in result.output


def test_simulate_is_deterministic(tmp_path):
    for name in ("first", "second"):
        assert main(["simulate", "--n", "10", "--seed", "5", "--out", str(tmp_path / name)]) == 0
    for file_name in ("curves.csv", "response.csv", "beta.csv"):
        assert (tmp_path / "first" / file_name).read_bytes() == (tmp_path / "second" / file_name).read_bytes()


def test_fit_writes_summary(tmp_path):
    main(["simulate", "--n", "30", "--seed", "1", "--out", str(tmp_path)])
    out = tmp_path / "fit.json"
    code = main(["fit", "--curves", str(tmp_path / "curves.csv"), "--response", str(tmp_path / "response.csv"),
                 "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["family"] == "gaussian-identity"


def test_single_test_prints_decision(capsys):
    code = main(["test", "--example", "example1", "--n", "30", "--a", "0", "--seed", "3", "--bootstrap-B", "100"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["success"] is True
    assert 0 <= payload["data"]["p_value"] <= 1
    assert payload["data"]["decision"] in {"reject", "retain"}


def test_test_on_csv_files(tmp_path, capsys):
    main(["simulate", "--n", "30", "--seed", "2", "--out", str(tmp_path)])
    capsys.readouterr()
    code = main(["test", "--curves", str(tmp_path / "curves.csv"), "--response", str(tmp_path / "response.csv"),
                 "--seed", "4", "--bootstrap-B", "100", "--p-mode", "fixed:3", "--out", str(tmp_path / "gof.json")])
    assert code == 0
    assert json.loads((tmp_path / "gof.json").read_text())["p"] == 3


def test_experiment_writes_one_row_per_cell(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"example": "example1", "n_list": [20], "a_list": [0.0, 0.2],
                                  "alpha_list": [0.05], "reps": 1, "B": 100, "p_modes": ["auto"]}))
    out = tmp_path / "report"
    code = main(["experiment", "--config", str(config), "--seed", "9", "--p-mode", "fixed:4",
                 "--n-jobs", "1", "--out", str(out)])
    assert code == 0
    frame = pd.read_csv(out.with_suffix(".csv"))
    assert len(frame) == 2 and set(frame["p_mode"].astype(str)) == {"4"}


def test_malformed_curves_exit_with_config_code(tmp_path, capsys):
    curves = tmp_path / "curves.csv"
    curves.write_text("0.0,0.5,1.0\n1.0,abc\n")
    response = tmp_path / "response.csv"
    response.write_text("y\n1.0\n")
    code = main(["test", "--curves", str(curves), "--response", str(response), "--bootstrap-B", "100"])
    assert code == 2
    assert '"success": false' in capsys.readouterr().err


def test_missing_config_exits_with_config_code(tmp_path):
    assert main(["experiment", "--config", str(tmp_path / "absent.json")]) == 2


def test_bad_p_mode_is_a_usage_error():
    assert main(["test", "--p-mode", "often"]) == 2


def test_numerical_failure_exit_code(monkeypatch):
    def broken(*args, **kwargs):
        raise NumericalError("bootstrap aborted")

    monkeypatch.setattr(cli_module, "run_gof_test", broken)
    assert main(["test", "--n", "10", "--seed", "1"]) == 3
