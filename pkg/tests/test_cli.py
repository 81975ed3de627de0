import json

import numpy as np
import pytest

from gmmd.cli import main


@pytest.fixture
def table(tmp_path):
    rng = np.random.default_rng(0)
    rows = [f"{v},{lab}" for lab, mu in (("a", 0), ("b", 5), ("c", -5)) for v in rng.normal(mu, 1, 10)]
    path = tmp_path / "data.csv"
    path.write_text("value,group\n" + "\n".join(rows) + "\n")
    return path


def test_test_command(table, capsys):
    assert main(["test", "--input", str(table), "--kernel", "gaussian", "--gamma", "2",
                 "--method", "permutation", "--B", "99", "--seed", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["p_value"] == 0.01 and doc["k"] == 3 and doc["method"] == "gmmd-permutation"


@pytest.mark.parametrize("method", ["spectral", "subsampling", "anderson-darling-k"])
def test_test_command_methods(table, capsys, method):
    assert main(["test", "--input", str(table), "--method", method, "--gamma", "median",
                 "--B", "49", "--draws", "1000"]) == 0
    assert 0 < json.loads(capsys.readouterr().out)["p_value"] <= 1


def test_input_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,a\n2,a\nx,b\n3,b\n")
    assert main(["test", "--input", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_numeric_error_exit_code(tmp_path, capsys):
    flat = tmp_path / "flat.csv"
    flat.write_text("1,a\n1,a\n1,b\n1,b\n")
    assert main(["test", "--input", str(flat), "--method", "spectral", "--draws", "1000"]) == 3
    assert "degenerate spectrum" in capsys.readouterr().err


def test_power_command(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("case = 2\nsizes = 6, 8\nreplications = 4\nB = 9\nmaster_seed = 1\n"
                   "methods = gmmd-permutation, kruskal-wallis\n")
    out = tmp_path / "out.csv"
    assert main(["power", "--config", str(cfg), "--out", str(out), "--format", "csv"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 4 and lines[0].startswith("method,case,n_total")
    assert main(["power", "--config", str(cfg), "--out", str(out), "--format", "json"]) == 0
    assert len(json.loads(out.read_text())["rows"]) == 4


def test_null_sim_command(tmp_path, capsys):
    spec = tmp_path / "spectrum.txt"
    spec.write_text("1.0\n")
    out = tmp_path / "draws.txt"
    assert main(["null-sim", "--k", "2", "--rho", "0.5,0.5", "--spectrum", str(spec),
                 "--draws", "20000", "--seed", "4", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    draws = np.loadtxt(out)
    assert draws.size == 20000 and draws.min() >= -4
    assert summary["mean"] == pytest.approx(draws.mean())
    assert abs(summary["mean"]) < 3 * np.sqrt(32 / 20000)


def test_null_sim_bad_rho(tmp_path):
    spec = tmp_path / "spectrum.txt"
    spec.write_text("1.0 0.5\n")
    assert main(["null-sim", "--k", "3", "--rho", "0.5,0.5", "--spectrum", str(spec)]) == 2
