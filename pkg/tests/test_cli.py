import json

import numpy as np
import pytest

from eqgeo import serialize
from eqgeo.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ----------------------------------------------------------------- loading

def test_all_fixture_files_load(fixtures_dir):
    for path in sorted(fixtures_dir.glob("*.json")):
        spec = json.loads(path.read_text())
        if serialize.is_economy_spec(spec):
            serialize.load_economy(path)
        else:
            serialize.load_manifold(path)
        # every fixture is also accepted by the manifold loader
        serialize.load_manifold(path)


def test_loader_rejects_unknown_kind(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "moebius", "L": 2}')
    with pytest.raises(Exception):
        serialize.load_manifold(bad)


def test_loader_rejects_positivity_violation(tmp_path):
    bad = tmp_path / "neg.json"
    bad.write_text(json.dumps({
        "kind": "analytic", "L": 2, "p": ["t"], "w": "1",
        "domain": {"t": [-1.0, 1.0], "alpha": [-1.0, 1.0]}}))
    with pytest.raises(Exception) as err:
        serialize.load_manifold(bad)
    assert "t=" in str(err.value)


# --------------------------------------------------------------------- fgp

def test_fgp_check_identical_cd(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fgp", "check",
                           str(fixtures_dir / "identical_cd.json"))
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "FGP_HOLDS"
    assert not report["theorem_violation"]


def test_fgp_check_remark1_exits_2(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fgp", "check",
                           str(fixtures_dir / "remark1.json"))
    assert code == 2
    report = json.loads(out)
    assert report["theorem_violation"]
    assert report["positivity_ok"] is False
    assert any("positivity" in n for n in report["notes"])


def test_fgp_check_hetero_fails_cleanly(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fgp", "check",
                           str(fixtures_dir / "hetero_cd.json"))
    assert code == 0
    assert json.loads(out)["verdict"] == "FGP_FAILS"


def test_fgp_check_remark2_na_fields(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fgp", "check",
                           str(fixtures_dir / "remark2.json"))
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "FGP_HOLDS"
    assert report["price_variation"] is None
    assert report["positivity_ok"] is None


def test_fgp_tol_flag(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "fgp", "check",
                           str(fixtures_dir / "hetero_cd.json"),
                           "--tol", "1e6")
    assert json.loads(out)["verdict"] == "FGP_HOLDS"


# ----------------------------------------------------------------- economy

def test_economy_count_ces_mirror(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "economy", "count",
                           str(fixtures_dir / "ces_mirror.json"))
    assert code == 0
    result = json.loads(out)
    assert result["count"] == 3
    assert result["roots"][1]["p1"] == pytest.approx(1.0, abs=1e-12)


def test_economy_solve(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "economy", "solve",
                           str(fixtures_dir / "hetero_cd.json"),
                           "--t", str(6.0 / 13.0))
    assert code == 0
    result = json.loads(out)
    assert result["p_head"][0] == pytest.approx(6.0 / 7.0, abs=1e-10)


def test_economy_curve_csv(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "economy", "curve",
                           str(fixtures_dir / "identical_cd.json"),
                           "--grid", "0.2,0.8,7")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,p_0,w,dp_0,dw"
    assert len(lines) == 8
    row = [float(v) for v in lines[1].split(",")]
    assert row[1] == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------- geodesic

def test_geodesic_shoot_csv(capsys, fixtures_dir, tmp_path):
    out_file = tmp_path / "traj.csv"
    code, _, _ = run_cli(capsys, "geodesic", "shoot",
                         str(fixtures_dir / "analytic_l2.json"),
                         "--x0", "0.0,0.0", "--v0", "1.0,0.2",
                         "--horizon", "0.5", "--step", "0.01",
                         "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "time,x_0,x_1,v_0,v_1,metric_speed"
    assert len(lines) == 52


def test_geodesic_residual_coord_curve(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "geodesic", "residual",
                           str(fixtures_dir / "analytic_l2.json"),
                           "--curve", "coord:0", "--grid", "0.0,1.0,11")
    assert code == 0
    assert out.splitlines()[0] == "time,total,normal,tangential"


def test_geodesic_residual_alpha_line(capsys, fixtures_dir):
    code, out, _ = run_cli(capsys, "geodesic", "residual",
                           str(fixtures_dir / "analytic_l2.json"),
                           "--curve", "alpha:0.5,1", "--grid=-1.0,1.0,11")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    assert all(abs(float(r[1])) <= 1e-8 for r in rows)  # exact ruling line


def test_geodesic_connect(capsys, fixtures_dir, tmp_path):
    out_file = tmp_path / "bvp.csv"
    code, _, err = run_cli(capsys, "geodesic", "connect",
                           str(fixtures_dir / "constant_price.json"),
                           "--from", "0.2,-0.5", "--to", "0.8,0.9",
                           "--out", str(out_file))
    assert code == 0
    assert "geodesic length" in err
    assert out_file.exists()


# -------------------------------------------------------------- christoffel

def test_christoffel_side_by_side(capsys, fixtures_dir, tmp_path):
    out_file = tmp_path / "gamma.json"
    code, out, _ = run_cli(capsys, "christoffel",
                           str(fixtures_dir / "analytic_l2.json"),
                           "--at", "0.0,0.0", "--out", str(out_file))
    assert code == 0
    assert "closed form" in out
    report = json.loads(out_file.read_text())
    closed = np.asarray(report["closed_form"])
    numeric = np.asarray(report["numeric"])
    assert closed[1, 0, 1] == pytest.approx(0.4, abs=1e-12)
    assert report["max_abs_difference"] <= 1e-6
    assert numeric.shape == (2, 2, 2)


# --------------------------------------------------------------- corollary

def test_corollary_deterministic_output(capsys, fixtures_dir, tmp_path):
    f1, f2 = tmp_path / "a.json", tmp_path / "b.json"
    code1, _, _ = run_cli(capsys, "corollary",
                          str(fixtures_dir / "identical_cd.json"),
                          "--seed", "5", "--out", str(f1))
    code2, _, _ = run_cli(capsys, "corollary",
                          str(fixtures_dir / "identical_cd.json"),
                          "--seed", "5", "--out", str(f2))
    assert code1 == code2 == 0
    assert f1.read_bytes() == f2.read_bytes()
    dash = json.loads(f1.read_text())
    assert dash["entropy"] == "UNAVAILABLE"
    assert dash["equilibrium_counts"] == [1] * 5


# ------------------------------------------------------------------- errors

def test_unknown_command_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64


def test_missing_required_flag_exits_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["christoffel"])
    assert exc.value.code == 64


def test_missing_file_exits_1(capsys):
    code, _, err = run_cli(capsys, "fgp", "check", "no_such_file.json")
    assert code == 1
