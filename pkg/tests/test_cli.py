"""Tests for the command-line front end and its exit-code contract."""

import csv
import io
import json
import subprocess
import sys

import pytest

from app.cli import EXIT_ABORT, EXIT_OK, EXIT_USAGE, main
from app.services.adversaries import CollectiveSpec
from app.services.efficiency import parse_efficiency_csv, qubit_efficiency

_RUN = ["run", "--participants", "3", "--secret-len", "8", "--decoys", "8", "--seed", "7"]


def test_run_honest(capsys):
    assert main([*_RUN, "--adversary", "none"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["stage"] == "completed"
    assert report["recovered"] == report["secret"]
    assert list(report)[0] == "config"


def test_run_is_byte_identical(capsys):
    main(_RUN)
    first = capsys.readouterr().out
    main(_RUN)
    second = capsys.readouterr().out
    assert first == second


def test_run_writes_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    replay = tmp_path / "replay.json"
    assert main([*_RUN, "--out", str(out), "--replay", str(replay)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["validity"] is True
    assert json.loads(replay.read_text())["transcript"]["stage"] == "completed"


def test_run_abort_exit_code(capsys):
    args = ["run", "--participants", "2", "--secret-len", "2", "--decoys", "16"]
    assert main([*args, "--adversary", "ir-fake", "--seed", "1"]) == EXIT_ABORT
    assert json.loads(capsys.readouterr().out)["aborted"] is True


def test_collective_requires_spec(capsys):
    assert main([*_RUN, "--adversary", "collective"]) == EXIT_USAGE
    assert "--ue-spec" in capsys.readouterr().err


def test_collective_with_spec(tmp_path, capsys):
    spec = tmp_path / "ue.json"
    CollectiveSpec.transparent().dump(spec)
    assert main([*_RUN, "--adversary", "collective", "--ue-spec", str(spec)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["error_rate"] == 0.0


def test_invalid_flags_exit_one(capsys):
    assert main(["run", "--participants", "1"]) == EXIT_USAGE
    assert main(["run", "--adversary", "teleport"]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["run", "--secret", "012", "--secret-len", "3"]) == EXIT_USAGE


def test_sweep_csv(capsys):
    args = ["sweep", "--participants", "2", "--secret-len", "1", "--decoys", "1,2"]
    assert main([*args, "--trials", "40", "--adversary", "dcna", "--adversary", "none"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [(r["model"], r["K"]) for r in rows] == [
        ("dcna", "1"), ("dcna", "2"), ("none", "1"), ("none", "2"),
    ]
    assert float(rows[0]["paper_formula"]) == 0.75
    assert float(rows[0]["exact"]) == pytest.approx(1 - 0.75**2)
    assert all(float(r["detected_fraction"]) == 0.0 for r in rows if r["model"] == "none")


def test_sweep_json(capsys):
    args = ["sweep", "-M", "2", "-N", "1", "--decoys", "1", "--trials", "10"]
    assert main([*args, "--adversary", "none", "--output", "json"]) == EXIT_OK
    (row,) = json.loads(capsys.readouterr().out)
    assert row["model"] == "none"
    assert row["detected_fraction"] == 0.0


def test_sweep_rejects_zero_trials(capsys):
    assert main(["sweep", "--trials", "0"]) == EXIT_USAGE


def test_attack_summary(capsys):
    args = ["attack", "--adversary", "dcna", "--participants", "2", "--secret-len", "1"]
    assert main([*args, "--decoys", "1", "--trials", "50"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["detection_by_op"] == pytest.approx({"M": 0.0, "MH": 0.5})
    assert abs(summary["message_information"] - 1.0) < 1e-6
    assert summary["estimate"]["paper_formula_value"] == 0.75


def test_table_text(capsys):
    assert main(["table", "--participants", "3", "--output", "text"]) == EXIT_OK
    out = capsys.readouterr().out
    assert any(line.startswith("ThisWork") and "1/12" in line for line in out.splitlines())


def test_table_csv_roundtrip(capsys):
    assert main(["table", "--participants", "2", "--output", "csv"]) == EXIT_OK
    parsed = parse_efficiency_csv(capsys.readouterr().out)
    assert parsed["Younes2024"] == qubit_efficiency("Younes2024", 2)


def test_table_rejects_one_participant(capsys):
    assert main(["table", "--participants", "1"]) == EXIT_USAGE


def _subprocess(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(  # noqa: S603
        [sys.executable, "-m", "app.cli", *args], capture_output=True, text=True, check=False
    )


def test_subprocess_exit_codes():
    assert _subprocess(*_RUN).returncode == EXIT_OK
    assert _subprocess("run", "--adversary", "collective").returncode == EXIT_USAGE
    aborted = _subprocess(
        "run", "--participants", "2", "--secret-len", "2", "--decoys", "16",
        "--adversary", "ir-fake", "--seed", "1",
    )
    assert aborted.returncode == EXIT_ABORT


def test_subprocess_output_is_deterministic():
    first, second = _subprocess(*_RUN), _subprocess(*_RUN)
    assert first.stdout == second.stdout
    assert first.stdout
