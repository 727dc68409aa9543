import csv
import json
import subprocess
import sys

import pytest

from arealab.cli import run


def report(capsys, argv):
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


def test_audit_example(capsys):
    code, rep = report(capsys, ["audit", "--D", "2", "--L", "4", "--family", "ti-random", "--seed", "7"])
    assert code == 0
    assert rep["schema"] == "arealab/1"
    assert rep["command"] == "audit"
    assert rep["passed"] is True
    assert rep["result"]["n_violations"] == 0
    assert rep["result"]["n_regions"] == 100


def test_entropy_example(capsys):
    code, rep = report(capsys, ["entropy", "--D", "2", "--L", "3", "--alpha", "0,0.5,1,2,inf", "--region", "0,0:2,2"])
    assert code == 0
    values = [e["bits"] for e in rep["result"]["entropies"]]
    assert len(values) == 5
    assert all(v <= values[0] + 1e-12 for v in values)
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_fingerprint_example(capsys):
    code, rep = report(capsys, ["fingerprint", "--n", "64", "--reps", "8", "--seed", "1"])
    assert code == 0
    res = rep["result"]
    assert res["repetitions"] == 8
    assert res["equal_pair"]["decision"] == "equal"
    assert res["unequal_pair"]["decision"] == "unequal"
    assert res["equal_pair"]["qubits_used"] == 8 * 10


def test_deterministic_output():
    argv = [sys.executable, "-m", "arealab.cli", "audit", "--L", "3", "--seed", "5"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b
    argv = [sys.executable, "-m", "arealab.cli", "fingerprint", "--n", "32", "--mode", "sampling", "--shots", "1000"]
    assert subprocess.run(argv, capture_output=True).stdout == subprocess.run(argv, capture_output=True).stdout


def test_unknown_command_exits_2():
    proc = subprocess.run([sys.executable, "-m", "arealab.cli", "teleport"], capture_output=True)
    assert proc.returncode == 2
    assert proc.stdout == b""


@pytest.mark.parametrize("argv", [
    ["counting", "--epsilon", "2", "--q", "4"],
    ["counting"],
    ["entropy", "--L", "3", "--region", "2,2:2,2"],
    ["fingerprint", "--n", "1"],
    ["audit", "--D", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(argv) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error" in captured.err


def test_infeasible_exits_3(capsys):
    assert run(["audit", "--L", "30"]) == 3
    assert "infeasible" in capsys.readouterr().err


def test_out_directory(tmp_path, capsys):
    out = tmp_path / "reports"
    code = run(["audit", "--L", "3", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert (out / "audit.json").read_text() == printed
    rows = list(csv.DictReader((out / "audit.csv").open()))
    assert len(rows) == 36
    assert set(rows[0]) == {"offset", "lengths", "schmidt_rank", "s0", "rank_bound", "boundary", "ok"}


@pytest.mark.parametrize("argv", [
    ["isotropic", "--L", "3"],
    ["crossterm", "--L", "3"],
    ["qecc-check", "--samples", "3"],
    ["decay", "--Ls", "3..6"],
    ["correlators", "--L", "3"],
    ["counting", "--L", "10"],
    ["cost", "--n", "256,65536"],
])
def test_other_subcommands_pass(capsys, argv):
    code, rep = report(capsys, argv)
    assert code == 0, rep
    assert rep["passed"] is True


def test_counting_report_values(capsys):
    _, rep = report(capsys, ["counting", "--L", "10", "--D", "2", "--epsilon", "0.1"])
    assert rep["result"]["q"] == 103
    assert rep["result"]["net_exceeds_budget"] is False
    _, rep = report(capsys, ["counting", "--q", str(2**20)])
    assert rep["result"]["net_exceeds_budget"] is True


def test_decay_report(capsys):
    _, rep = report(capsys, ["decay", "--Ls", "3..8"])
    assert abs(rep["result"]["exponent"] + 1) <= 0.15
