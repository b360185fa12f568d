import json
import subprocess
import sys
from pathlib import Path

import pytest

from kdv5.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_candidate(capsys):
    code, out, _ = run(capsys, "classify", DATA / "constant.json", "--target", "1,1,1,-2,1")
    assert code == 0
    assert json.loads(out)["verdict"] == "candidate"


def test_classify_excluded(capsys):
    code, out, err = run(capsys, "classify", DATA / "excluded.json")
    assert code == 1
    data = json.loads(out)
    assert data["verdict"] == "excluded" and "J1_1" in data["failed"]
    assert "J1_1" in err


def test_classify_damped(capsys):
    code, out, _ = run(capsys, "classify", DATA / "damped.json", "--target", "1,1,1,-2,1")
    data = json.loads(out)
    assert code == 0 and data["recognition"]["matched"] and data["dampingRemoved"]


def test_invariants(capsys, monkeypatch):
    monkeypatch.setenv("KDV5_GRID_POINTS", "11")
    code, out, _ = run(capsys, "invariants", DATA / "excluded.json")
    data = json.loads(out)
    assert code == 0 and data["grid"]["points"] == 11
    assert data["invariants"]["J1_1"]["values"]["start"]["value"] == pytest.approx(1.0)
    assert len(data["flags"]) == 9


def test_bad_grid_env(capsys, monkeypatch):
    monkeypatch.setenv("KDV5_GRID_POINTS", "many")
    assert run(capsys, "invariants", DATA / "excluded.json")[0] == 2


def test_transform(capsys):
    code, out, _ = run(capsys, "transform", DATA / "damped.json", "--target", "1,1,1,-2,1", "--k2", "0.25")
    data = json.loads(out)["transformation"]
    assert code == 0
    assert data["tMap"]["prefactor"] == pytest.approx(2**2.5)
    assert data["k2"] == 0.25 and set(data) >= {"tMap", "xScale", "k2", "uScaleSource"}


def test_transform_unrecognized(capsys):
    code, out, _ = run(capsys, "transform", DATA / "excluded.json", "--target", "1,1,1,-2,1")
    assert code == 1 and json.loads(out)["matched"] is False


def test_solve_verify_kink(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "kink", "--a", "1", "--m4", "1", "--m5", "1")
    assert code == 0
    data = json.loads(out)
    assert data["solutionSource"] == "tanh(x - t)^2" and data["waveSpeed"] == 1
    bundle = tmp_path / "kink.json"
    bundle.write_text(out)
    code, out, _ = run(capsys, "verify", bundle)
    report = json.loads(out)
    assert code == 0 and report["maxAbsResidual"] < 1e-8


def test_verify_failure(capsys, tmp_path):
    _, out, _ = run(capsys, "solve", "kink", "--a", "1", "--m4", "1", "--m5", "1")
    data = json.loads(out)
    data["equation"]["coefficients"]["B"] = "-0.4833333333"
    bundle = tmp_path / "bad.json"
    bundle.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", bundle, "--nt", "11", "--nx", "41")
    assert code == 1 and json.loads(out)["pass"] is False


def test_solve_map_then_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "kink", "--a", "1", "--m4", "1", "--m5", "1", "--map", DATA / "damped_kink.json")
    assert code == 0
    bundle = tmp_path / "mapped.json"
    bundle.write_text(out)
    code, out, _ = run(capsys, "verify", bundle)
    report = json.loads(out)
    assert code == 0 and report["threshold"] == 1e-6 and report["maxAbsResidual"] < 1e-6


def test_sample(capsys, tmp_path):
    _, out, _ = run(capsys, "solve", "soliton", "--a", "1", "--m4", "2", "--m5", "1")
    bundle = tmp_path / "s.json"
    bundle.write_text(out)
    code, out, _ = run(capsys, "sample", bundle, "--nt", "1", "--nx", "1", "--t-range", "0,0", "--x-range", "0,0")
    assert code == 0 and out == "t,x,u\n0,0,1\n"


def test_sample_window(capsys, tmp_path):
    _, out, _ = run(capsys, "solve", "compacton", "--a", "1", "--m5", "1")
    bundle = tmp_path / "c.json"
    bundle.write_text(out)
    code, out, _ = run(capsys, "sample", bundle, "--nt", "1", "--nx", "5", "--window")
    rows = out.splitlines()[1:]
    assert code == 0 and [r.split(",")[2] for r in rows] == ["0", "0", "1", "0", "0"]


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "soliton", "--a", "1", "--m4", "1", "--m5", "1"],
        ["solve", "kink", "--a", "1"],
        ["solve", "compacton", "--a", "1", "--m5", "1", "--m4", "2"],
        ["classify", "/nonexistent.json"],
        ["classify", str(DATA / "constant.json"), "--rel-tol", "-1"],
        ["classify", str(DATA / "constant.json"), "--target", "1,2,3"],
        ["bogus"],
        ["verify", str(DATA / "constant.json"), "--unknown-flag"],
    ],
)
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_bad_expression(capsys, tmp_path):
    p = tmp_path / "eq.json"
    p.write_text(json.dumps({"coefficients": {"A": "1 +", "B": "1", "C": "1", "E": "1", "F": "1"}, "domain": [0, 1]}))
    code, _, err = run(capsys, "invariants", p)
    assert code == 2 and "offset" in err


def test_deterministic_stdout():
    cmd = [sys.executable, "-m", "kdv5", "transform", str(DATA / "damped.json"), "--target", "1,1,1,-2,1"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["matched"]
