import importlib.resources
import json

import pytest
import yaml

from resgrid.cli import main

FIXTURE = str(importlib.resources.files("resgrid") / "scenarios/two_island_wildfire.yaml")


def test_validate_subcommand(capsys):
    assert main(["validate", FIXTURE]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["valid"] is True
    assert out["regions"] == 6
    assert out["demand_agents"] == 4
    assert out["storage_agents"] == 3


def test_run_writes_outputs(tmp_path, capsys):
    code = main(["run", FIXTURE, "--out-dir", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["scenario"] == "two_island_wildfire"
    for name in ("timeline.csv", "solver.csv", "transactions.csv", "report.json"):
        assert (tmp_path / name).exists()


def test_run_json_format(tmp_path, capsys):
    assert main(["run", FIXTURE, "--out-dir", str(tmp_path),
                 "--format", "json"]) == 0
    capsys.readouterr()
    data = json.loads((tmp_path / "run_result.json").read_text())
    assert {"report", "timeline", "equilibria", "transactions"} <= set(data)


def test_seed_override_changes_result(tmp_path, capsys):
    main(["run", FIXTURE, "--out-dir", str(tmp_path / "a"), "--seed", "123"])
    a = json.loads(capsys.readouterr().out)
    main(["run", FIXTURE, "--out-dir", str(tmp_path / "b")])
    b = json.loads(capsys.readouterr().out)
    assert a["seed"] == 123
    assert b["seed"] == 5


def test_missing_scenario_file_errors(capsys):
    assert main(["validate", "/does/not/exist.yaml"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ParseError"


def test_invalid_scenario_errors(tmp_path, capsys):
    raw = yaml.safe_load(open(FIXTURE))
    raw["market"]["xi"] = 0
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump(raw))
    assert main(["validate", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError"
    assert "market.xi" in err["message"]


def test_oracle_check_subcommand(capsys):
    assert main(["oracle-check", FIXTURE]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_relative_gap"] <= 5e-2
    assert report["solves"] > 0
