import csv
import json

import numpy as np
import pytest

from rosenlab import cli, simulate


def run(argv, capsys=None):
    return cli.main([str(a) for a in argv])


def test_unknown_flag_is_usage_error(capsys):
    assert run(["spectrum", "--bogus"]) == 2
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand(capsys):
    assert run([]) == 2


def test_hurst_out_of_range(capsys):
    assert run(["spectrum", "--hurst", "1.2"]) == 2
    assert "H out of (0.5,1)" in capsys.readouterr().err


def test_spectrum_csv_and_manifest(tmp_path):
    prof = tmp_path / "profile.csv"
    prof.write_text("time,xi\n0.5,1.0\n1.0,-0.5\n")
    out = tmp_path / "spectrum.csv"
    assert run(["spectrum", "--profile", prof, "--hurst", 0.7, "--nodes", 200, "--out", out]) == 0
    rows = list(csv.DictReader(out.open()))
    lam = np.array([float(r["eigenvalue"]) for r in rows])
    # Var(Z_.5 - Z_1/2) from the covariance
    s, c, H = 0.5, 0.5, 0.7
    var = s ** (2 * H) + c * c - c * (1 + s ** (2 * H) - (1 - s) ** (2 * H))
    man = json.loads((tmp_path / "spectrum.csv.manifest.json").read_text())
    assert 2 * (np.sum(lam ** 2) + man["params"]["tail_sq"]) == pytest.approx(var, rel=1e-8)
    assert man["params"]["hurst"] == 0.7 and man["status"] == "ok"


def test_charfn_config_merge(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("hurst = 0.85\nseed = 3\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["charfn", "--config", cfg, "--xi-grid", "0:1:0.5", "--out", a]) == 0
    assert run(["charfn", "--config", cfg, "--hurst", 0.7, "--xi-grid", "0:1:0.5", "--out", b]) == 0
    ma = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.csv.manifest.json").read_text())
    assert ma["params"]["hurst"] == 0.85 and ma["seed"] == 3
    assert mb["params"]["hurst"] == 0.7  # flag wins over config
    ra = list(csv.DictReader(a.open()))
    assert [float(r["xi"]) for r in ra] == [0.0, 0.5, 1.0]
    assert float(ra[0]["modulus"]) == 1.0


def test_simulate_loctime_pipeline(tmp_path):
    paths = tmp_path / "paths.bin"
    assert run(["simulate", "--hurst", 0.7, "--steps", 1024, "--paths", 3, "--seed", 42,
                "--out", paths]) == 0
    back = simulate.read_paths(paths)
    ref = simulate.sample_paths(0.7, 1024, 3, seed=42)
    np.testing.assert_array_equal(back[2].values, ref[2].values)
    lt = tmp_path / "lt.csv"
    assert run(["loctime", "--paths", paths, "--interval", "0,1", "--bin", 0.01,
                "--method", "histogram", "--out", lt]) == 0
    rows = list(csv.DictReader(lt.open()))
    mass = sum(float(r["density"]) for r in rows if r["path"] == "0") * 0.01
    assert mass == pytest.approx(1.0)
    assert (tmp_path / "lt.csv.manifest.json").exists()


def test_simulate_needs_out(capsys):
    assert run(["simulate", "--steps", 16]) == 2


def test_verify_simplex_sphere(tmp_path, capsys):
    out = tmp_path / "simplex.json"
    assert run(["verify", "alku", "--n", 2, "--hurst", 0.7, "--gammas", "0,0.1", "--out", out]) == 0
    assert json.loads(out.read_text())["rel"] < 1e-3
    assert run(["verify", "simplex-sphere", "--n", 1, "--hurst", 0.6]) == 0


def test_verify_all_subset_and_report(tmp_path, capsys):
    out = tmp_path / "summary.json"
    assert run(["verify", "all", "--only", "1,2", "--out", out, "--threads", 1]) == 0
    text = capsys.readouterr().out
    assert "PASS" in text
    summary = json.loads(out.read_text())
    assert [c["id"] for c in summary["criteria"]] == [1, 2]
    assert run(["report", out]) == 0


def test_numerical_error_exit_code(tmp_path, capsys):
    # too few windows for the tail fit is a numerical failure, not a usage error
    out = tmp_path / "tail.json"
    code = run(["verify", "sup-tail", "--paths", 5, "--steps", 256, "--out", out])
    assert code == 1
    man = json.loads((tmp_path / "tail.json.manifest.json").read_text())
    assert man["status"] == "tail-events"
