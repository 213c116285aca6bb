"""Command-line interface: outputs, formats, exit codes, determinism."""

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from modalkit.cli import main, svg_polyline
from modalkit.density import asymptotics, preset
from modalkit.harness import CSV_COLUMNS
from modalkit.kernels import make_kernel


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def test_criteria_markdown_biweight_row():
    code, text = run(["criteria", "--d", "1", "--q", "2", "--format", "markdown"])
    assert code == 0
    rows = [l for l in text.splitlines() if l.startswith("| Biweight")]
    assert rows == ["| Biweight | 0.1083 [1.0000] |"]
    assert len([l for l in text.splitlines() if l.startswith("| ")]) == 11


@pytest.mark.parametrize("q", [4, 6])
def test_criteria_higher_order_rows(q):
    code, text = run(["criteria", "--q", str(q), "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["kernel"] for r in rows] == [f"B{q}", f"E{q}", f"G{q}", f"L{q}"]
    assert float(rows[0]["ratio"]) == 1.0


def test_criteria_multivariate_lists_rk_pk_and_bound():
    code, text = run(["criteria", "--d", "3", "--q", "2", "--format", "json"])
    rows = json.loads(text)
    names = [r["kernel"] for r in rows]
    assert names[:4] == ["RK Biweight", "RK Epanechnikov", "RK Gaussian", "RK Laplace"]
    assert names[-1] == "PK lower bound"


def test_ratio_csv_has_ten_rows_starting_at_one():
    code, text = run(["ratio", "--kind", "rk-vs-pk", "--d-max", "10", "--format", "csv"])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 10
    assert float(rows[0]["value"]) == 1.0
    vals = [float(r["value"]) for r in rows]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_ratio_svg():
    code, text = run(["ratio", "--kind", "gaussian", "--d-max", "5", "--format", "svg"])
    assert code == 0
    assert text.startswith("<svg") and text.count(",") >= 5
    assert "<polyline" in svg_polyline([1, 2], [3, 3])


def test_bandwidth_matches_library():
    code, text = run(["bandwidth", "--density", "skewed", "--kernel", "gaussian", "--n", "1600", "--format", "json"])
    rec = json.loads(text)
    a = asymptotics(preset("skewed"), make_kernel("gaussian", 1, 2), 1600)
    assert rec["h_opt"] == pytest.approx(a.h_opt, rel=1e-15)
    assert rec["point"] == pytest.approx(a.mode.tolist())


def test_bandwidth_inline_json_density():
    mix = json.dumps({"weights": [0.5, 0.5], "means": [[0.0], [1.0]], "scales": [[1.0], [1.4142135623730951]]})
    code, text = run(["bandwidth", "--density", mix, "--n", "100", "--format", "json"])
    assert code == 0 and json.loads(text)["point"][0] == pytest.approx(0.23945729, abs=1e-7)


def test_estimate_single_row(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0.75\n")
    code, text = run(["estimate", "--input", str(path), "--kernel", "biweight", "--d", "1", "--q", "2", "--h", "0.3"])
    assert code == 0
    assert json.loads(text)["estimate"] == [0.75]


def test_estimate_isme_returns_sample_point(tmp_path):
    pts = np.random.default_rng(0).normal(size=(40, 2))
    path = tmp_path / "pts.csv"
    np.savetxt(path, pts, delimiter=",")
    code, text = run(["estimate", "--input", str(path), "--d", "2", "--h", "0.5", "--method", "isme"])
    est = json.loads(text)["estimate"]
    assert any(np.allclose(est, row, rtol=0, atol=0) for row in np.loadtxt(path, delimiter=",", ndmin=2))


def test_mlr_command(tmp_path):
    rng = np.random.default_rng(1)
    z = rng.normal(size=200)
    path = tmp_path / "xy.csv"
    np.savetxt(path, np.column_stack([z, 1 + 2 * z]), delimiter=",")
    code, text = run(["mlr", "--input", str(path), "--h", "0.5"])
    assert code == 0
    assert json.loads(text)["coefficients"] == pytest.approx([1.0, 2.0], abs=1e-8)


def test_cluster_command(tmp_path):
    x = preset("bimodal").sample(1500, np.random.default_rng(2))
    path = tmp_path / "x.csv"
    np.savetxt(path, x, delimiter=",")
    code, text = run(["cluster", "--input", str(path), "--h", "0.8", "--truth", "bimodal"])
    rec = json.loads(text)
    assert code == 0 and 1.0 < rec["antimode"] < 3.0 and 0 <= rec["cer"] < 0.2


SIM = ["simulate", "--kernels", "biweight,laplace", "--n", "50,100", "--trials", "3", "--seed", "5"]


def test_simulate_csv_round_trip():
    code, text = run(SIM)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 4
    for r in rows:
        float(r["mse"])
        int(r["n"])


def test_simulate_seed_determines_bytes(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(SIM + ["--threads", "1", "--output", str(a)])[0] == 0
    assert run(SIM + ["--threads", "2", "--output", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(SIM[:-1] + ["6"])[1] != a.read_text()


def test_simulate_config_file_and_json(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kernels": ["gaussian"], "n_grid": [80], "trials": 2, "seed": 3}))
    code, text = run(["simulate", "--config", str(cfg), "--format", "json"])
    rec = json.loads(text)
    assert code == 0 and rec["config"]["seed"] == 3 and rec["rows"][0]["kernel"] == "gaussian"
    assert rec["rows"][0]["mean_cer"] is None


def test_simulate_markdown():
    code, text = run(SIM + ["--format", "markdown"])
    assert code == 0 and text.startswith("| Kernel | AMSE ratio | n=50 | n=100 |")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["criteria", "--bogus"],
        ["ratio", "--kind", "other"],
        ["estimate", "--h", "0.3"],
        ["bandwidth"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv)[0] == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["criteria", "--q", "3"],
        ["bandwidth", "--density", "nowhere", "--n", "10"],
        ["bandwidth", "--kernel", "unknown", "--n", "10"],
        ["bandwidth", "--n", "0"],
        ["simulate", "--trials", "1"],
    ],
)
def test_domain_errors_exit_1(argv, capsys):
    assert run(argv)[0] == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: ")


def test_estimate_negative_bandwidth_is_domain_error(tmp_path, capsys):
    path = tmp_path / "p.csv"
    path.write_text("0.1\n0.2\n")
    assert run(["estimate", "--input", str(path), "--h", "-1"])[0] == 1
    assert run(["estimate", "--input", str(tmp_path / "missing.csv"), "--h", "1"])[0] == 1


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modalkit.cli", "ratio", "--d-max", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "d,value"
    proc = subprocess.run([sys.executable, "-m", "modalkit.cli", "criteria", "--q", "5"], capture_output=True, text=True)
    assert proc.returncode == 1
