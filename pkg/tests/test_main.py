"""Test cases for the __main__ module."""
import json
from pathlib import Path
from typing import Any

import pytest
from click.testing import CliRunner

from cubemixer import __main__
from cubemixer.config import ExperimentConfig


@pytest.fixture
def runner() -> CliRunner:
    """Fixture for invoking command-line interfaces."""
    return CliRunner()


def write_config(tmp_path: Path, document: dict) -> str:
    """Writes a JSON config document and returns its path."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps(document))
    return str(path)


def test_main_succeeds(runner: CliRunner) -> None:
    """It exits with a status code of zero."""
    result = runner.invoke(__main__.main, ["--help"])
    assert result.exit_code == 0
    for scenario in ("verify", "kernel", "almost-perfect", "simulate"):
        assert scenario in result.output


def test_version(runner: CliRunner) -> None:
    """It prints the package version."""
    result = runner.invoke(__main__.main, ["--version"])
    assert result.exit_code == 0
    assert "version" in result.output


def test_describe(runner: CliRunner) -> None:
    """It prints the columns without running the scenario."""
    result = runner.invoke(__main__.main, ["cutoff-scan", "--describe"])
    assert result.exit_code == 0
    assert result.output.startswith("cutoff-scan columns:\n")
    assert "limit_upper" in result.output


def test_kernel_to_stdout(tmp_path: Path, runner: CliRunner) -> None:
    """It writes the CSV to stdout without --out."""
    config = write_config(tmp_path, {"parameters": {"N": 1}})
    result = runner.invoke(__main__.main, ["kernel", "-c", config, "-m", "exact"])
    assert result.exit_code == 0
    assert result.output == "t,from,to,probability\n1,0,0,0\n1,0,1,1\n1,1,0,2/3\n1,1,1,1/3\n"


def test_kernel_to_file(tmp_path: Path, runner: CliRunner) -> None:
    """It writes the CSV and its JSON sidecar."""
    config = write_config(tmp_path, {"parameters": {"N": 1, "hamming": True}, "seed": 4})
    out = tmp_path / "results" / "kernel.csv"
    result = runner.invoke(
        __main__.main,
        ["kernel", "--config", config, "--out", str(out), "-v"],
        env={"CUBE_MIXER_MODE": "exact"},
    )
    assert result.exit_code == 0
    assert out.read_text().splitlines()[3] == "1,1,0,2/3"
    metadata = json.loads(out.with_suffix(".json").read_text())
    assert metadata["config"]["mode"] == "exact"
    assert metadata["config"]["seed"] == 4
    assert metadata["summary"] == {}


def test_config_error_exits_with_two(tmp_path: Path, runner: CliRunner) -> None:
    """It reports the field of an invalid config."""
    config = write_config(tmp_path, {"parameters": {"law": {"kind": "walk"}}})
    result = runner.invoke(__main__.main, ["kernel", "-c", config])
    assert result.exit_code == 2
    assert "Error: Invalid config: law.kind" in result.output


def test_invalid_workers_exit_with_two(runner: CliRunner) -> None:
    """It rejects a worker count below one."""
    result = runner.invoke(__main__.main, ["spectrum", "--workers", "0"])
    assert result.exit_code == 2
    assert "Invalid config: workers" in result.output


def test_capacity_error_exits_with_four(tmp_path: Path, runner: CliRunner) -> None:
    """It stops when a subset spectrum is too large."""
    config = write_config(tmp_path, {"parameters": {"N": 13, "law": {"kind": "block", "beta": 1}}})
    result = runner.invoke(__main__.main, ["spectrum", "-c", config])
    assert result.exit_code == 4


def test_failed_verification_exits_with_three(
    tmp_path: Path, runner: CliRunner, monkeypatch: pytest.MonkeyPatch
) -> None:
    """It writes the results before failing."""

    def failing(config: ExperimentConfig) -> Any:
        return [{"check": "marginals", "case": "N=1", "passed": False, "detail": "x"}]

    monkeypatch.setattr(__main__, "run_scenario", failing)
    out = tmp_path / "verify.csv"
    result = runner.invoke(__main__.main, ["verify", "--out", str(out)])
    assert result.exit_code == 3
    assert out.read_text() == "check,case,passed,detail\nmarginals,N=1,false,x\n"
    assert json.loads(out.with_suffix(".json").read_text())["summary"]["failed"] == 1
