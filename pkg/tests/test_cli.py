import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dirac_spectra.cli import EXIT_COMPUTATION, EXIT_FILE, EXIT_VALIDATION, main, parse_grid, parse_xgrid
from dirac_spectra.core import load_spectrum
from dirac_spectra.errors import ValidationError

DATA = Path(__file__).resolve().parents[1] / "data"


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0] == "# schema_version=1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_forward(capsys):
    code, out, _ = run_cli(["forward", "--potential", DATA / "constant_q_0.3.json", "--nmax", 3], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["schema_version"] == 1 and d["theta"] == 0 and d["N"] == 3
    l3 = [e for e in d["entries"] if e["n"] == 3][0]["l1"]
    assert l3[0] == pytest.approx(math.sqrt(36 + 0.09), abs=1e-9)


def test_det_and_determinism(tmp_path, capsys):
    args = ["det", "--potential", DATA / "zero_potential.json", "--grid=-1:1:0.5"]
    assert run_cli(args + ["--out", tmp_path / "a.csv"], capsys)[0] == 0
    assert run_cli(args + ["--out", tmp_path / "b.csv"], capsys)[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = read_csv((tmp_path / "a.csv").read_text())
    lam = [float(r["lam_re"]) for r in rows]
    assert lam == [-1, -0.5, 0, 0.5, 1]
    assert np.allclose([float(r["delta_re"]) for r in rows], np.cos(np.pi * np.array(lam)) - 1, atol=1e-12)


def test_det_from_spectrum_json_table(tmp_path, capsys):
    out = tmp_path / "d.json"
    code, _, _ = run_cli(["det-from-spectrum", "--spectrum", DATA / "spectrum_constant_q_0.3.json",
                          "--grid", "0:4:1", "--N", 128, "--out", out], capsys)
    assert code == 0
    d = json.loads(out.read_text())
    assert d["columns"] == ["lam_re", "lam_im", "delta_re", "delta_im"] and len(d["rows"]) == 5
    # Delta(0) = cosh(pi a) - 1 for constant q = a
    assert d["rows"][0]["delta_re"] == pytest.approx(math.cosh(0.3 * math.pi) - 1, abs=1e-3)


def test_f_sums(capsys):
    code, out, _ = run_cli(["f-sums", "--spectrum", DATA / "spectrum_counterexample_m10.json",
                            "--K", 16, "--N", 256], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [int(r["k"]) for r in rows] == list(range(-16, 17))
    ps = [float(r["partial_sum"]) for r in rows]
    assert ps[-1] > 0


def test_admissible(capsys):
    code, out, _ = run_cli(["admissible", "--spectrum", DATA / "spectrum_counterexample_m10.json",
                            "--K", 1024], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "inconsistent"


def test_construct_then_glm_check(tmp_path, capsys):
    cons = tmp_path / "c.json"
    code, _, _ = run_cli(["construct", "--target", DATA / "spectrum_constant_q_0.04.json",
                          "--N", 48, "--out", cons], capsys)
    assert code == 0
    d = json.loads(cons.read_text())
    assert d["N0"] == 0 and d["verification"]["passed"]
    code, out, _ = run_cli(["glm-check", "--construction", cons, "--xgrid", 2, "--grid", 64, "--N", 24], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [r["pass"] for r in rows] == ["true", "true"]
    assert float(rows[1]["x"]) == pytest.approx(math.pi)


def test_counterexample_rows_pass(capsys):
    code, out, _ = run_cli(["counterexample", "--pmin", 10, "--pmax", 13], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [int(r["p"]) for r in rows] == [10, 11, 12, 13]
    assert all(r["pass"] == "true" for r in rows)


def test_exit_codes(tmp_path, capsys):
    code, _, err = run_cli(["forward", "--potential", tmp_path / "missing.json"], capsys)
    assert code == EXIT_FILE and "file error" in err
    code, _, _ = run_cli(["det", "--potential", DATA / "zero_potential.json", "--grid", "1:0:0.1"], capsys)
    assert code == EXIT_VALIDATION
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(["admissible", "--spectrum", bad, "--K", 4], capsys)[0] == EXIT_VALIDATION
    assert run_cli(["counterexample", "--pmin", 5], capsys)[0] == EXIT_VALIDATION
    # |f| is far above threshold near the origin, so N0 = 0 cannot work
    code, _, err = run_cli(["construct", "--target", DATA / "spectrum_constant_q_0.3.json",
                            "--N0", 0, "--N", 32], capsys)
    assert code == EXIT_COMPUTATION and "try N0=" in err


def test_threads_env(monkeypatch, capsys):
    monkeypatch.setenv("DIRAC_SPECTRA_THREADS", "zero")
    assert run_cli(["counterexample", "--pmax", 10], capsys)[0] == EXIT_VALIDATION


def test_tolerance_override(capsys):
    args = ["det-from-spectrum", "--spectrum", DATA / "spectrum_constant_q_0.3.json", "--grid", "0.5:0.5:1"]
    _, short, _ = run_cli(args + ["--tol-truncation-N", 8], capsys)
    _, default, _ = run_cli(args, capsys)
    assert short != default
    assert run_cli(args + ["--tol-disk-radius", 1.0], capsys)[0] == EXIT_VALIDATION


def test_grid_parsers():
    assert np.allclose(parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_xgrid("2"), [math.pi / 2, math.pi])
    assert np.allclose(parse_xgrid("0.5,1.5"), [0.5, 1.5])
    with pytest.raises(ValidationError):
        parse_grid("0:1")


def test_bundled_spectra_load():
    for name in ("spectrum_constant_q_0.3.json", "spectrum_constant_q_0.04.json", "spectrum_counterexample_m10.json"):
        assert load_spectrum(DATA / name).N >= 256


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "dirac_spectra.cli", "counterexample", "--pmax", "10"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("# schema_version=1")
