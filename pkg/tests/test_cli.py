"""Tests covering the `welander` command-line entry point.

Inputs: Argument lists passed straight to `main`, monkeypatched solver hooks and temporary
output paths.
Outputs: Exit codes, JSON reports checked against the shipped schemas' required keys, CSV tables
and JSON error objects on standard error.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any

import pytest

from welander_filippov import cli, config, io
from welander_filippov.simulate import scan
from welander_filippov.errors import BracketFailure, InvalidParameters
from welander_filippov.welander import WelanderParams


def _missing_keys(schema_name: str, payload: dict[str, Any]) -> list[str]:
    """Return the required keys of a schema (and its matching status branch) absent from payload."""

    schema = io.load_schema(schema_name)
    required = list(schema["required"])
    for branch in schema.get("oneOf", []):
        if branch["properties"]["status"]["const"] == payload.get("status"):
            required.extend(branch["required"])
    return [key for key in required if key not in payload]


def _run_json(argv: list[str], capsys: pytest.CaptureFixture[str]) -> tuple[int, dict[str, Any]]:
    code = cli.main(argv)
    return code, json.loads(capsys.readouterr().out)


def _last_error(capsys: pytest.CaptureFixture[str]) -> dict[str, Any]:
    lines = capsys.readouterr().err.strip().splitlines()
    return json.loads(lines[-1])


def test_analyze_reports_the_cycle_regime(capsys: pytest.CaptureFixture[str]) -> None:
    """Ensure the reference preset produces a complete canonical-frame report.

    Inputs: capsys (pytest.CaptureFixture[str]): captures the JSON written to stdout.
    Outputs: Report with every required key, the cycle regime and the escaping segment (0, B).
    """

    code, report = _run_json(["analyze", "--preset", "reference"], capsys)

    assert code == 0
    assert _missing_keys("analyze", report) == []
    assert report["frame"] == "canonical"
    assert report["regime"] == "unique_stable_cycle"
    assert report["has_cycle"] is True
    assert "no_cycle_reason" not in report
    assert report["escaping"]["interval"] == pytest.approx([0.0, 0.01])
    assert report["sliding"] == {"interval": None, "length": 0.0}
    assert [fold["visibility"] for fold in report["folds"]] == ["invisible", "invisible"]
    assert report["zones"]["left"]["eigenvalues"] == pytest.approx([-0.5, -1.0])


def test_analyze_real_regime_names_the_reason(real_params: WelanderParams) -> None:
    report = cli.cmd_analyze(cli.RunConfig(real_params))

    assert report["regime"] == "real_equilibrium_no_cycle"
    assert report["no_cycle_reason"] == "real_equilibrium"
    assert report["zones"]["left"]["equilibrium"]["kind"] == "real"
    assert report["folds"][0]["visibility"] == "visible"


def test_analyze_sliding_regime_lists_the_pseudo_equilibrium(sliding_params: WelanderParams) -> None:
    report = cli.cmd_analyze(cli.RunConfig(sliding_params))

    assert report["sliding"]["length"] == pytest.approx(0.01)
    assert [item["stable"] for item in report["pseudo_equilibria"]] == [True]
    assert report["no_cycle_reason"] == "epsilon_nonnegative"


def test_analyze_writes_to_out_path(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    target = tmp_path / "analysis.json"

    code = cli.main(["analyze", "--preset", "reference", "--out", str(target)])

    assert code == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["status"] == "ok"


def test_cycle_reports_a_certified_cycle(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Ensure `cycle` returns the certified orbit and writes the requested polyline.

    Inputs: tmp_path (Path) for the polyline CSV, capsys for the JSON report.
    Outputs: status `cycle`, a residual below 1e-10 and 2 x 20 polyline rows.
    """

    polyline = tmp_path / "cycle.csv"

    code, report = _run_json(
        ["cycle", "--preset", "reference", "--polyline", str(polyline), "--polyline-points", "20"], capsys
    )

    assert code == 0
    assert _missing_keys("cycle", report) == []
    assert report["status"] == "cycle"
    assert abs(report["area_residual"]) < 1e-10
    assert 0.0 < report["multiplier"] < 1.0
    with polyline.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "x", "y", "side"]
    assert len(rows) == 41
    assert {row[3] for row in rows[1:]} == {"left", "right"}


def test_cycle_without_cycle_exits_cleanly(capsys: pytest.CaptureFixture[str]) -> None:
    code, report = _run_json(["cycle", "--preset", "reference", "--epsilon", "0.01"], capsys)

    assert code == 0
    assert _missing_keys("cycle", report) == []
    assert report["status"] == "no_cycle"
    assert report["reason"] == "epsilon_nonnegative"
    assert report["params"]["epsilon"] == 0.01


def test_scan_writes_csv_rows(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(
        ["scan", "--preset", "reference", "--eps-from", "-0.02", "--eps-to", "0.01", "--eps-step", "0.01"]
    )

    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert code == 0
    assert rows[0] == list(cli.SCAN_HEADER)
    assert [row[0] for row in rows[1:]] == ["-0.02", "-0.01", "0", "0.01"]
    assert [row[1] for row in rows[1:]] == ["true", "true", "false", "false"]
    assert rows[-1][2:] == ["", "", "", ""]


def test_scan_json_includes_reasons(capsys: pytest.CaptureFixture[str]) -> None:
    code, payload = _run_json(
        ["scan", "--preset", "reference", "--eps-from", "0", "--eps-to", "0.01", "--eps-step", "0.01", "--format", "json"],
        capsys,
    )

    assert code == 0
    assert [row["reason"] for row in payload["rows"]] == ["epsilon_nonnegative", "epsilon_nonnegative"]
    assert payload["params"]["alpha"] == 0.8


def test_scan_logs_failed_points_and_keeps_exit_code_zero(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str], caplog: pytest.LogCaptureFixture
) -> None:
    """Ensure a failing grid point becomes an error row plus an error-level summary.

    Inputs: monkeypatch (pytest.MonkeyPatch): makes the cycle search fail at epsilon = -0.01.
    Outputs: Exit code 0, an "error:BracketFailure" row and one ERROR record naming the point.
    """

    real_find_cycle = scan.find_cycle

    def flaky(params: WelanderParams) -> Any:
        if params.epsilon == -0.01:
            raise BracketFailure("displacement does not change sign")
        return real_find_cycle(params)

    monkeypatch.setattr(scan, "find_cycle", flaky)

    with caplog.at_level(logging.ERROR, logger="welander_filippov.cli"):
        code, payload = _run_json(
            ["scan", "--preset", "reference", "--eps-from", "-0.02", "--eps-to", "0", "--eps-step", "0.01", "--format", "json"],
            capsys,
        )

    assert code == 0
    assert [row["reason"] for row in payload["rows"]] == [None, "error:BracketFailure", "epsilon_nonnegative"]
    errors = [record for record in caplog.records if record.levelno == logging.ERROR]
    assert len(errors) == 1
    assert "1 of 3 scan points failed" in errors[0].getMessage()
    assert "epsilon=-0.01" in errors[0].getMessage()


def test_trajectory_writes_samples_and_events(tmp_path: Path) -> None:
    samples = tmp_path / "trajectory.csv"
    events = tmp_path / "events.json"

    code = cli.main(
        [
            "trajectory",
            "--preset",
            "reference",
            "--x0",
            "0",
            "--y0",
            "0.2",
            "--horizon",
            "2",
            "--dt-sample",
            "0.5",
            "--out",
            str(samples),
            "--events",
            str(events),
        ]
    )

    assert code == 0
    payload = json.loads(events.read_text(encoding="utf-8"))
    assert _missing_keys("events", payload) == []
    assert payload["frame"] == "canonical"
    assert payload["events"][-1]["kind"] == "time_limit"
    lines = samples.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(cli.TRAJECTORY_HEADER)
    assert lines[1].startswith("0,0,0.20000000000000001,left,0")


def test_trajectory_without_initial_state_is_invalid(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["trajectory", "--preset", "reference"])

    assert code == 2
    error = _last_error(capsys)
    assert error["status"] == "error"
    assert error["error"] == "InvalidParameters"
    assert "--x0" in error["message"]


def test_invalid_parameter_exits_with_code_two(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["analyze", "--preset", "reference", "--beta", "0"])

    assert code == 2
    assert _last_error(capsys)["error"] == "InvalidParameters"


def test_unsupported_format_exits_with_code_two(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["analyze", "--preset", "reference", "--format", "csv"])

    assert code == 2
    assert "--format csv" in _last_error(capsys)["message"]


def test_internal_defect_exits_with_code_three(
    monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    def broken(_: WelanderParams) -> None:
        raise BracketFailure("displacement does not change sign")

    monkeypatch.setattr(cli, "find_cycle", broken)

    code = cli.main(["cycle", "--preset", "reference"])

    assert code == 3
    assert _last_error(capsys)["error"] == "BracketFailure"


def test_flags_override_config_file_and_file_overrides_preset(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Ensure precedence is flag > config file > preset.

    Inputs: a config file setting epsilon = -0.02 on top of the reference preset.
    Outputs: epsilon -0.02 without a flag and -0.03 with `--epsilon -0.03`.
    """

    path = tmp_path / "run.json"
    path.write_text(json.dumps({"params": {"epsilon": -0.02}, "options": {"preset": "reference"}}), encoding="utf-8")

    _, from_file = _run_json(["cycle", "--config", str(path)], capsys)
    _, from_flag = _run_json(["cycle", "--config", str(path), "--epsilon", "-0.03"], capsys)

    assert from_file["params"]["epsilon"] == -0.02
    assert from_flag["params"]["epsilon"] == -0.03
    assert from_flag["params"]["alpha"] == 0.8


def test_config_file_options_fill_command_defaults(tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"alpha": 0.8, "beta": 0.5, "epsilon": -0.01, "k0": 0.0, "k1": 1.0, "horizon": 3.0}))
    args = cli._parse_args(["trajectory", "--config", str(path), "--dt-sample", "0.2"])

    run = cli._build_run_config(args, ("horizon", "dt_sample", "x0"))

    assert run.option("horizon") == 3.0
    assert run.option("dt_sample") == 0.2
    assert run.option("x0") is None


def test_portrait_numbers_each_start(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(
        [
            "portrait",
            "--preset",
            "reference",
            "--start",
            "0,0.2",
            "--start=-0.3,0.6",
            "--horizon",
            "1",
            "--dt-sample",
            "0.5",
        ]
    )

    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert code == 0
    assert rows[0] == ["start_id", *cli.TRAJECTORY_HEADER]
    assert {row[0] for row in rows[1:]} == {"0", "1"}


def test_portrait_grid_starts() -> None:
    assert cli._grid_starts((-1.0, 1.0, 0.0, 0.5, 2)) == [(-1.0, 0.0), (-1.0, 0.5), (1.0, 0.0), (1.0, 0.5)]
    with pytest.raises(InvalidParameters):
        cli._grid_starts((-1.0, 1.0, 0.0, 0.5, 0))


def test_smooth_model_rejects_the_canonical_frame(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(
        ["trajectory", "--preset", "reference", "--x0", "0", "--y0", "0.2", "--smooth", "0.001", "--frame", "canonical"]
    )

    assert code == 2
    assert "raw frame" in _last_error(capsys)["message"]


def test_epsilon_grid_includes_both_ends() -> None:
    grid = cli.epsilon_grid(-0.05, 0.05, 0.01)

    assert len(grid) == 11
    assert grid[0] == -0.05 and grid[-1] == 0.05
    assert 0.0 in grid


@pytest.mark.parametrize(("start", "stop", "step"), [(0.0, 0.1, 0.0), (0.1, 0.0, 0.01), (0.0, float("nan"), 0.01)])
def test_epsilon_grid_rejects_bad_ranges(start: float, stop: float, step: float) -> None:
    with pytest.raises(InvalidParameters):
        cli.epsilon_grid(start, stop, step)


@pytest.mark.parametrize(
    ("value", "name", "recognised"),
    [("DEBUG", "debug", True), (" info ", "info", True), ("loud", "quiet", False)],
)
def test_logging_settings_follow_the_environment(
    monkeypatch: pytest.MonkeyPatch, value: str, name: str, recognised: bool
) -> None:
    monkeypatch.setenv(config.LOG_ENV_VAR, value)

    settings = config.get_logging_settings()

    assert settings["name"] == name
    assert settings["recognised"] is recognised
    assert settings["level"] == config.LOG_LEVELS[name]


def test_logging_defaults_to_quiet() -> None:
    assert config.get_logging_settings() == {"name": "quiet", "level": config.LOG_LEVELS["quiet"], "recognised": True}
