import json
import subprocess
import sys

import pytest

from nessdual.cli import main


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def bmp_spec(tmp_path):
    return write(tmp_path / "bmp.json", {"family": "BMP", "L": 4, "T_left": 1, "T_right": 2, "boundary": "reservoirs"})


def test_profile_equilibrium_is_all_ones(tmp_path, capsys):
    spec = write(tmp_path / "eq.json", {"family": "BMP", "L": 5, "T_left": 1, "T_right": 1, "boundary": "reservoirs"})
    assert main(["solve", "profile", "--spec", spec]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# spec:") and lines[1] == "i,value"
    assert [float(l.split(",")[1]) for l in lines[2:]] == pytest.approx([1.0] * 5, abs=1e-12)


def test_solve_moment_exact(bmp_spec, capsys):
    assert main(["solve", "moment", "--spec", bmp_spec, "--eta", "0;1,0,0,0;0", "--exact"]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "0;1,0,0,0;0,6/5"


def test_solve_covariance(bmp_spec, tmp_path):
    out = tmp_path / "cov.csv"
    assert main(["solve", "covariance", "--spec", bmp_spec, "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[1] == "i,j,value" and len(rows) == 2 + 6


def test_verify_duality_passes(capsys):
    assert main(["verify", "duality", "--pair", "bmp-sip1", "--max-eta", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["pass"] is True and doc["residual_terms"] == []


def test_verify_other_checks(capsys):
    assert main(["verify", "su11", "--rep", "discrete", "--max-eta", "4"]) == 0
    assert main(["verify", "intertwiner", "--m", "m", "--max-eta", "5"]) == 0
    assert main(["verify", "duality", "--pair", "l3-rotated", "--phi", "pi/4", "--float", "--max-eta", "2"]) == 0
    assert main(["verify", "change-of-coords", "--phi", "pi/6", "--max-eta", "1", "--degree", "3"]) == 0


def test_usage_errors_exit_1(bmp_spec, capsys):
    assert main(["verify", "duality", "--pair", "nope"]) == 1
    assert main(["solve", "moment", "--spec", bmp_spec]) == 1
    err = capsys.readouterr().err
    assert "--eta" in err
    assert main(["solve", "moment", "--spec", bmp_spec, "--eta", "1,2"]) == 1
    assert "eta0;eta1" in capsys.readouterr().err
    assert main(["solve", "profile", "--spec", "/nonexistent.json"]) == 1


def test_bad_spec_exit_1(tmp_path, capsys):
    spec = write(tmp_path / "bad.json", {"family": "BMP", "L": 3, "colour": 1})
    assert main(["solve", "profile", "--spec", spec]) == 1
    assert "UnknownField" in capsys.readouterr().err


def test_verification_failure_exit_2(monkeypatch, capsys):
    from nessdual import cli, duality

    monkeypatch.setattr(cli, "check_intertwiner", lambda *a, **k: duality.Report("intertwiner", {}, passed=False))
    assert main(["verify", "intertwiner"]) == 2


def test_simulate_is_reproducible(bmp_spec, tmp_path):
    args = ["simulate", "bmp", "--spec", bmp_spec, "--steps", "3000", "--observe-every", "10", "--seed", "7", "--trajectories", "2"]
    assert main(args + ["--out", str(tmp_path / "a"), "--workers", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("trajectory_0000.csv", "trajectory_0001.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["spec"]["L"] == 4
    assert set(manifest) >= {"spec", "command", "seed", "parameters", "tool_version", "started", "finished"}


def test_rerun_reproduces(bmp_spec, tmp_path):
    out = tmp_path / "r"
    assert main(["simulate", "bmp", "--spec", bmp_spec, "--steps", "500", "--seed", "3", "--out", str(out)]) == 0
    first = (out / "trajectory_0000.csv").read_bytes()
    (out / "trajectory_0000.csv").unlink()
    assert main(["rerun", str(out / "manifest.json")]) == 0
    assert (out / "trajectory_0000.csv").read_bytes() == first


def test_simulate_family_mismatch(bmp_spec, tmp_path):
    assert main(["simulate", "bep", "--spec", bmp_spec, "--steps", "10", "--out", str(tmp_path / "x")]) == 1


def test_report_transport(bmp_spec, tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["simulate", "bmp", "--spec", bmp_spec, "--steps", "20000", "--observe-every", "10", "--out", str(out), "--trajectories", "2", "--workers", "1"]) == 0
    assert main(["report", "transport", "--in", str(out)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"spec", "J", "J_stderr", "kappa_L", "profile"}
    assert len(doc["profile"]) == 4 and doc["profile"][0][0] == 1


def test_sip_command(tmp_path, capsys):
    spec = write(tmp_path / "sip.json", {"family": "SIP", "L": 3, "boundary": "absorbing"})
    out = tmp_path / "abs.csv"
    assert main(["sip", "--spec", spec, "--eta", "0;1,0,1;0", "--runs", "20", "--seed", "1", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "run_index,a,b,n_events,total_time" and len(rows) == 21
    assert (tmp_path / "abs.csv.manifest.json").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "nessdual", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
