import csv
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from pivotal import cli
from pivotal.errors import NoConvergence

EX = "0.5,0.8,0.4,0.7,0.6"


def test_scan(tmp_path, capsys):
    out, summ = tmp_path / "s.csv", tmp_path / "s.json"
    rc = cli.main(["scan", "--n", "2", "--skip", "0.1", "--out", str(out), "--summary", str(summ)])
    assert rc == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["case_index", "phi_1", "phi_2", "phi_3", "lambda2"]
    data = json.loads(summ.read_text())
    assert data["count"] == len(rows) - 1 == 36
    assert data["variant"] == "structural-strict"
    assert json.loads(capsys.readouterr().out)["count"] == 36


@pytest.mark.parametrize("design", ["ops", "ms", "two-stage", "rops"])
def test_enumerate(tmp_path, design):
    out = tmp_path / "d.csv"
    assert cli.main(["enumerate", "--pi", EX, "--design", design, "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert sum(Fraction(int(r["numerator"]), int(r["denominator"])) for r in rows) == 1


def test_enumerate_two_stage_ms(tmp_path):
    out = tmp_path / "d.csv"
    pi = "0.3,0.3,0.7,0.3,0.7,0.2,0.3,0.2"
    assert cli.main(["enumerate", "--pi", pi, "--design", "two-stage", "--first-stage", "ms", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert sum(Fraction(int(r["numerator"]), int(r["denominator"])) for r in rows) == 1
    assert all(len(r["outcome"].split(";")) == 3 for r in rows)


def test_variance(capsys):
    assert cli.main(["variance", "--pi", EX, "--y", "3,1,4,1,5"]) == 0
    lines = dict(l.split("\t") for l in capsys.readouterr().out.strip().splitlines())
    v_ops, v_ms, e = (Fraction(lines[k]) for k in ("V_ops", "V_ms", "E_vHH"))
    assert e - v_ops == Fraction(3, 2) * (v_ms - v_ops)
    assert 0.625 <= float(lines["lambda2"]) <= 0.991


def test_mc(capsys):
    assert cli.main(["mc", "--pi", EX, "--y", "3,1,4,1,5", "--reps", "300", "--seed", "4"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["replicates"] == 300 and rep["exact_var_ms"] == pytest.approx(3109 / 84)


def test_validation_exit_code(tmp_path, capsys):
    assert cli.main(["variance", "--pi", "0.5,0.6", "--y", "1,2"]) == cli.EXIT_VALIDATION
    assert cli.main(["variance", "--pi", "0.5,abc", "--y", "1,2"]) == cli.EXIT_VALIDATION
    assert cli.main(["scan", "--n", "3", "--skip", "0.03", "--out", str(tmp_path / "x")]) == 2
    assert "error" in capsys.readouterr().err


def test_numerical_exit_code(monkeypatch):
    def boom(_):
        raise NoConvergence("forced")

    monkeypatch.setattr(cli, "gabler_summary", boom)
    assert cli.main(["variance", "--pi", EX, "--y", "3,1,4,1,5"]) == cli.EXIT_NUMERICAL


def test_console_module():
    res = subprocess.run(
        [sys.executable, "-m", "pivotal.cli", "variance", "--pi", "0.5,0.5", "--y", "1,2"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and "V_ops\t1" in res.stdout
