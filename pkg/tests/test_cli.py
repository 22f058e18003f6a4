import csv
import gzip
import json
import os
import subprocess
import sys

import pytest

from guided_spectra import figures
from guided_spectra.cli import EXIT_INPUT, EXIT_LAW, EXIT_OK, main, parse_range, InputError
from guided_spectra.dispersion import guided_eigenvalues
from guided_spectra.medium import default_medium


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_parse_range():
    assert parse_range("3..20") == (3, 20)
    assert parse_range("7") == (7, 7)
    for bad in ("5..3", "0..4", "a..b"):
        with pytest.raises(InputError):
            parse_range(bad)


def test_spectrum_counts(tmp_path):
    assert main(["spectrum", "--k", "1..20", "--out", str(tmp_path)]) == EXIT_OK
    r = rows(tmp_path / "spectrum.csv")
    m = default_medium()
    assert len(r) == sum(guided_eigenvalues(m, k).Lk for k in range(1, 21))
    assert {x["zone"] for x in r} == {"GUIDED"}
    summary = json.loads((tmp_path / "spectrum.json").read_text())
    assert summary["total_guided"] == len(r)
    assert (tmp_path / "spectrum.png").stat().st_size > 0


def test_empty_spectrum_is_header_only(tmp_path):
    assert main(["spectrum", "--k", "1", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "spectrum.csv").read_text() == "k,kappa,ell,lam,zone\n"
    figures.write_csv(tmp_path / "e.csv", [], figures.EIGEN_COLUMNS)
    assert (tmp_path / "e.csv").read_text() == ",".join(figures.EIGEN_COLUMNS) + "\n"


def test_eigen_scatter_lines_exact(tmp_path):
    assert main(["figure", "eigen-scatter", "--k", "1..6", "--out", str(tmp_path)]) == EXIT_OK
    r = rows(tmp_path / "eigen_scatter.csv")
    assert list(r[0]) == list(figures.EIGEN_COLUMNS)
    lines = [x for x in r if x["series"] == "line:c=2"]
    assert len(lines) == 6
    for x in lines:
        assert float(x["lam"]) == 2.0 * float(x["kappa"])
    assert any(x["series"] == "line:c=1" for x in r)
    assert (tmp_path / "eigen_scatter.png").exists()


def test_dispersion_curve_sign_changes(tmp_path):
    assert main(["figure", "dispersion-curve", "--k", "1..8", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "dispersion_curve.json").read_text())
    assert doc["sign_changes"] == doc["Lk"]
    assert doc["Lk"]["8"] == 4


def test_two_jump_figure(tmp_path):
    assert main(["figure", "two-jump", "--k", "2..5", "--out", str(tmp_path)]) == EXIT_OK
    zones = {x["zone"] for x in rows(tmp_path / "two_jump.csv")}
    assert {"GUIDED_0", "GUIDED_I"} <= zones


def test_verify_branch_equivalent(tmp_path):
    code = main(["verify", "THM21", "--ell", "1", "--k", "10..60", "--region", "0,1,0.7,0.9", "--out", str(tmp_path)])
    assert code == EXIT_OK
    doc = json.loads((tmp_path / "verify_THM21.json").read_text())
    assert doc["passed"] and abs(doc["fit"]["final_ratio"] - 1) < 0.05
    ratios = [float(x["ratio"]) for x in rows(tmp_path / "verify_THM21.csv")]
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
    assert (tmp_path / "verify_THM21.png").exists()


def test_verify_failure_exit_code(tmp_path):
    assert main(["verify", "LEM26", "--out", str(tmp_path)]) == EXIT_LAW
    doc = json.loads((tmp_path / "verify_LEM26.json").read_text())
    for f in doc["failures"]:
        assert {"law", "k", "measured", "required", "quantity"} <= set(f)
    assert main(["verify", "LEM26", "--reference", "derived", "--out", str(tmp_path)]) == EXIT_OK


def test_empty_sweep_exit_code(tmp_path):
    assert main(["verify", "THM34", "--case", "3", "--k", "5..8", "--out", str(tmp_path)]) == EXIT_LAW
    assert json.loads((tmp_path / "verify_THM34.json").read_text())["status"] == "EMPTY_SWEEP"


@pytest.mark.parametrize("argv", [
    ["verify", "NOPE"],
    ["verify", "THM21", "--k", "9..3"],
    ["verify", "THM21", "--region", "0,1,0.9"],
    ["verify", "THM21", "--region", "0,1,0.9,0.7"],
    ["verify", "THM11", "--eps", "-1"],
    ["spectrum", "--config", "/nonexistent.json"],
    ["oracle", "--profile", "no-such-profile"],
    ["oracle", "--n", "8"],
])
def test_input_errors(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_bad_medium_config(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"medium": {"L": 1, "H": 1, "interfaces": [0.5], "speeds": [2, 1]}}))
    assert main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT
    assert "NON_MONOTONE_SPEEDS" in capsys.readouterr().err


def test_config_defaults_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"medium": {"L": 1, "H": 1, "interfaces": [0.5], "speeds": [1, 5]},
                               "params": {"k": "1..4"}, "out": str(tmp_path / "a")}))
    assert main(["spectrum", "--config", str(cfg)]) == EXIT_OK
    assert {x["k"] for x in rows(tmp_path / "a" / "spectrum.csv")} == {"1", "2", "3", "4"}
    assert main(["spectrum", "--config", str(cfg), "--k", "5", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert len(rows(tmp_path / "b" / "spectrum.csv")) == 5


def test_mode_and_mass(tmp_path):
    assert main(["mode", "--k", "10", "--ell", "2", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "mode.json").read_text())
    assert doc["zone"] == "GUIDED" and doc["interface_mismatch"] < 1e-10
    assert list(rows(tmp_path / "mode.csv")[0]) == list(figures.PROFILE_COLUMNS)
    assert main(["mass", "--k", "10", "--ell", "1", "--a", "0", "--b", "1", "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "mass.json").read_text())["ratio"] == pytest.approx(1.0)


def test_classify(tmp_path):
    assert main(["classify", "--k", "1..30", "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "classify.json").read_text())
    assert doc["counts"] == {"CASE1": 30, "CASE2": 0, "CASE3": 0}
    assert main(["classify", "--random", "20", "--seed", "3", "--k", "1..15", "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "classify.json").read_text())["disagreements"] == 0


def test_oracle_with_vectors(tmp_path):
    assert main(["oracle", "--profile", "linear", "--k", "2", "--n", "256", "--count", "4", "--vectors",
                 "--out", str(tmp_path)]) == EXIT_OK
    r = rows(tmp_path / "oracle.csv")
    assert [x["index"] for x in r] == ["1", "2", "3", "4"]
    with gzip.open(tmp_path / "oracle_vectors.csv.gz", "rt") as fh:
        header = fh.readline().strip().split(",")
        body = fh.read().splitlines()
    assert header == ["x", "v1", "v2", "v3", "v4"]
    assert len(body) == 257
    assert main(["oracle", "--k", "3", "--n", "512", "--range", "100,400", "--out", str(tmp_path)]) == EXIT_OK


def test_outputs_byte_identical(tmp_path):
    for run, threads in (("a", "1"), ("b", "4")):
        assert main(["verify", "THM11", "--k", "5..20", "--threads", threads, "--seed", "5",
                     "--out", str(tmp_path / run)]) == EXIT_OK
    for name in ("verify_THM11.csv", "verify_THM11.json", "verify_THM11.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point_and_log_env(tmp_path):
    env = dict(os.environ, GUIDED_SPECTRA_LOG="INFO")
    out = subprocess.run([sys.executable, "-m", "guided_spectra", "verify", "THM34", "--case", "3", "--k", "5..6",
                          "--out", str(tmp_path)], capture_output=True, text=True, env=env)
    assert out.returncode == EXIT_LAW
    assert "EMPTY_SWEEP" in out.stderr
    assert "THM34: FAIL" in out.stdout
