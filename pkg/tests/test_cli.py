import json
import math

import pytest

from sidewall.cli import main


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 64
    assert "unknown subcommand" in capsys.readouterr().err


def test_verify_kernels_cli(capsys):
    assert main(["verify-kernels", "--points", "500", "--fd", "10"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 8


def test_missing_config(capsys, tmp_path):
    path = str(tmp_path / "missing.ini")
    assert main(["init-data", "--config", path]) == 1
    assert path in capsys.readouterr().err


def test_ode_compare(capsys):
    assert main(["ode-compare", "--alpha", "1", "--beta", "1", "--x0", "0", "--y0", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["t_star_closed_form"] - 1.570796) < 1e-6
    assert main(["ode-compare", "--alpha", "1", "--beta", "1", "--x0", "0", "--y0", "0"]) == 1


def test_pipeline(tmp_path, capsys, monkeypatch):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nmaxSteps = 2\n")
    out = tmp_path / "out"
    assert main(["init-data", "--config", str(ini), "--out", str(out), "--strict"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and (out / "G0.field").exists()
    assert main(["packet-scan", "--config", str(ini), "--gamma", str(out / "Gamma0.field"),
                 "--g", str(out / "G0.field"), "--csv", str(tmp_path / "p.csv")]) == 0
    assert json.loads(capsys.readouterr().out)["clusterScore"] > 0
    monkeypatch.setenv("SIDEWALL_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run-sim", "--config", str(ini)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["steps"] == 2 and (tmp_path / "env" / "series.csv").exists()
    assert main(["trace-compare", str(tmp_path / "env" / "series.csv"),
                 "--a-col", "A", "--b-col", "B"]) == 0
    assert "c1_hat" in json.loads(capsys.readouterr().out)
