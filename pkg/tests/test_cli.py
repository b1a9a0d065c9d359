import json
import os

import pytest

from capergo.cli import main
from capergo.scenarios import REGISTRY


def run_cli(args):
    return main(args)


def test_list_names_every_scenario(capsys):
    assert run_cli(["list"]) == 0
    out = capsys.readouterr().out
    assert len(REGISTRY) >= 12
    for name, _, _, _ in REGISTRY:
        assert name in out


def test_run_writes_report_and_csv(tmp_path, capsys):
    code = run_cli(["run", "finite-swap-ergodic", "--out", str(tmp_path)])
    assert code == 0
    rep_path = tmp_path / "finite-swap-ergodic" / "report.json"
    report = json.loads(rep_path.read_text())
    assert report["overall"] is True
    assert report["scenario"] == "finite-swap-ergodic"
    assert all("check" in c and "verdict" in c for c in report["checks"])
    csvs = list((tmp_path / "finite-swap-ergodic").glob("*.csv"))
    assert csvs, "expected at least one csv table"


def test_run_is_byte_identical(tmp_path):
    paths = []
    for i in range(2):
        out = tmp_path / str(i)
        assert run_cli(["run", "rotation-swap-halves", "--out",
                        str(out)]) == 0
        paths.append(out / "rotation-swap-halves" / "report.json")
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CAPERGO_OUT", str(tmp_path / "envout"))
    assert run_cli(["run", "finite-swap-ergodic"]) == 0
    assert (tmp_path / "envout" / "finite-swap-ergodic" /
            "report.json").exists()


def test_unknown_scenario_is_config_error(tmp_path):
    assert run_cli(["run", "no-such-scenario", "--out", str(tmp_path)]) == 2


def test_bad_override_is_config_error(tmp_path):
    assert run_cli(["run", "finite-swap-ergodic", "--set", "oops",
                    "--out", str(tmp_path)]) == 2


def test_zero_horizon_override_is_config_error(tmp_path):
    assert run_cli(["run", "rotation-swap-halves", "--set", "N=0",
                    "--out", str(tmp_path)]) == 2


def test_scenario_file_with_overrides(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"name": "rotation-swap-halves",
                               "config": {"N": 64}}))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "rotation-swap-halves" /
                      "report.json").read_text())
    assert rep["config"]["N"] == 64


def test_scenario_file_unknown_name(tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"name": "bogus"}))
    assert run_cli(["run", str(cfg), "--out", str(tmp_path)]) == 2


def test_check_capacity_subcommand(tmp_path, capsys):
    path = tmp_path / "cap.json"
    path.write_text(json.dumps(
        {"n": 2, "kind": "lambda", "lambda": [["1", "0"], ["0", "1"]]}))
    assert run_cli(["check-capacity", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["subadditive"] is True
    assert out["additive"] is False


def test_core_subcommand(tmp_path, capsys):
    path = tmp_path / "cap.json"
    path.write_text(json.dumps(
        {"n": 2, "kind": "lambda", "lambda": [["1", "0"], ["0", "1"]]}))
    assert run_cli(["core", str(path)]) == 0
    verts = json.loads(capsys.readouterr().out)
    from fractions import Fraction
    parsed = sorted([Fraction(x) for x in v] for v in verts)
    assert parsed == [[0, 1], [1, 0]]


def test_missing_capacity_file(tmp_path):
    assert run_cli(["check-capacity", str(tmp_path / "nope.json")]) == 2


def test_lyapunov_subcommand_runs_cocycle_scenarios(tmp_path):
    assert run_cli(["lyapunov", "kingman-two-cycle", "--out",
                    str(tmp_path)]) == 0
    assert (tmp_path / "kingman-two-cycle" / "report.json").exists()


def test_lyapunov_rejects_other_scenarios(tmp_path):
    assert run_cli(["lyapunov", "finite-swap-ergodic", "--out",
                    str(tmp_path)]) == 2


def test_seed_flag_changes_seeded_config(tmp_path):
    for seed, sub in ((3, "a"), (4, "b")):
        assert run_cli(["run", "polynomial-birkhoff", "--seed", str(seed),
                        "--out", str(tmp_path / sub)]) == 0
    a = json.loads((tmp_path / "a" / "polynomial-birkhoff" /
                    "report.json").read_text())
    b = json.loads((tmp_path / "b" / "polynomial-birkhoff" /
                    "report.json").read_text())
    assert a["config"]["seed"] == 3 and b["config"]["seed"] == 4
