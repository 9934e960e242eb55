import json

import numpy as np
import pytest

from hbvm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_tableau_midpoint(capsys):
    code, out, err = run(capsys, "tableau", "--k", "1", "--s", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "c,A_1"
    assert lines[1] == "0.5,0.5"
    assert lines[2] == "b,1"
    assert "identity residuals" in err


def test_tableau_gauss_two_stage(capsys):
    code, out, _ = run(capsys, "tableau", "--k", "2", "--s", "2")
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:3]]
    A = np.array([[float(v) for v in r[1:]] for r in rows])
    r3 = np.sqrt(3.0)
    np.testing.assert_allclose(A, [[0.25, 0.25 - r3 / 6], [0.25 + r3 / 6, 0.25]], atol=1e-15)


def test_tableau_rkn_and_json(capsys):
    code, out, _ = run(capsys, "tableau", "--k", "3", "--s", "2", "--form", "rkn")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "c,Abar_1,Abar_2,Abar_3"
    assert lines[-2].startswith("bbar,") and lines[-1].startswith("b,")
    code, out, _ = run(capsys, "tableau", "--k", "3", "--s", "2", "--format", "json")
    data = json.loads(out)
    assert data["k"] == 3 and data["s"] == 2 and len(data["A"]) == 3


def test_tableau_rejects_k_below_s(capsys):
    code, _, err = run(capsys, "tableau", "--k", "1", "--s", "2")
    assert code == 2
    assert "k must be ≥ s" in err


def test_integrate_pendulum_rows(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, stdout, _ = run(
        capsys, "integrate", "--problem", "pendulum", "--s", "2", "--k", "4",
        "--n-steps", "100", "--tf", "5", "--out", str(out),
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,y_1,yd_1,H,")
    assert len(lines) == 102
    assert "steps=100" in stdout


def test_integrate_kepler_energy(capsys, tmp_path):
    code, stdout, _ = run(
        capsys, "integrate", "--problem", "kepler", "--param", "eccentricity=0.6",
        "--s", "3", "--k", "6", "--n-steps", "2000", "--tf", "20",
        "--out", str(tmp_path / "k.csv"),
    )
    assert code == 0
    drift = float(stdout.split("max|dH|=")[1].split()[0])
    assert drift <= 1e-10


def test_integrate_json(capsys):
    code, out, err = run(capsys, "integrate", "--problem", "harmonic", "--n-steps", "4", "--tf", "1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["t"]) == 5 and data["partial"] is False
    assert "steps=4" in err


def test_unknown_problem(capsys):
    code, _, err = run(capsys, "integrate", "--problem", "lorenz")
    assert code == 2
    assert "harmonic" in err


def test_missing_problem(capsys):
    code, _, err = run(capsys, "integrate")
    assert code == 2 and "--problem" in err


def test_order_study_slope(capsys):
    code, out, _ = run(
        capsys, "order-study", "--problem", "harmonic", "--s", "2",
        "--h", "0.2,0.1,0.05,0.025", "--tf", "1", "--out", "/dev/null",
    )
    assert code == 0
    slope = float(out.split("final slope=")[1].split()[0])
    assert 3.8 <= slope <= 4.2


def test_order_study_empty_ladder(capsys):
    code, _, err = run(capsys, "order-study", "--problem", "harmonic", "--h", "")
    assert code == 2 and "ladder" in err


def test_energy_drift_comparison(capsys):
    code, out, _ = run(
        capsys, "energy-drift", "--problem", "henon-heiles", "--s", "2", "--k", "3",
        "--compare-k", "2", "--tf", "100", "--n-steps", "1000", "--out", "/dev/null",
    )
    assert code == 0
    ratio = float(out.split("ratio=")[1].split()[0])
    assert ratio >= 100


def test_config_round_trip(capsys, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    argv = ["integrate", "--problem", "henon-heiles", "--s", "2", "--k", "3", "--n-steps", "50", "--tf", "5"]
    assert main(argv + ["--out", str(first), "--dump-config", str(cfg_path)]) == 0
    saved = json.loads(cfg_path.read_text())
    saved["out"] = str(second)
    cfg_path.write_text(json.dumps(saved))
    assert main(["integrate", "--config", str(cfg_path)]) == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()


def test_flags_override_config(capsys, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"problem": "harmonic", "n_steps": 3, "tf": 1.0}))
    code, out, _ = run(capsys, "integrate", "--config", str(cfg_path), "--n-steps", "6")
    assert code == 0 and len(out.splitlines()) == 8


def test_unknown_config_key(capsys, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"problem": "harmonic", "stepsize": 0.1}))
    code, _, err = run(capsys, "integrate", "--config", str(cfg_path))
    assert code == 2 and "stepsize" in err


def test_numerical_failure_exit_code(capsys):
    code, out, err = run(
        capsys, "integrate", "--problem", "vdpol-2nd", "--param", "mu=1000",
        "--tf", "10", "--n-steps", "5", "--max-iters", "3",
    )
    assert code == 3
    assert "partial" in err
    assert out.startswith("t,")


@pytest.mark.parametrize("bad", [["--n-steps", "0"], ["--tol", "-1"], ["--param", "nokey"]])
def test_invalid_settings(capsys, bad):
    code, _, _ = run(capsys, "integrate", "--problem", "harmonic", *bad)
    assert code == 2
