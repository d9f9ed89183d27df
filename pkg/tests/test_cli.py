import csv
import json

import numpy as np
import pytest

from cp1lax.cli import main, parse_complex
from cp1lax.errors import ConfigurationError

BASE = """\
[algebra]
name = su(2)

[curve]
p1 = {p1}
p2 = {p2}
eps = {eps}

[contour]
nodes = 256

[lattice]
n1 = 24
n2 = 24
init = random-fourier
amplitude = 0.15

[lax]
row_stride = 4
drift_tol = 0.05

[run]
experiment = {experiment}
seed = 7
output_dir = {outdir}
"""


def write_cfg(tmp_path, **kw):
    text = BASE.format(**kw)
    path = tmp_path / "exp.ini"
    path.write_text(text)
    return path


def test_parse_complex_formats():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("1+2j") == 1 + 2j
    assert parse_complex("-3.5i") == -3.5j
    with pytest.raises(ConfigurationError):
        parse_complex("eleven")


def test_validate_echo_and_errors(tmp_path, capsys):
    cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                    experiment="geometry-check", outdir=tmp_path / "o")
    assert main(["validate", str(cfg)]) == 0
    echo = json.loads(capsys.readouterr().out)
    assert echo["experiment"] == "geometry-check"

    bad = write_cfg(tmp_path, p1="1+0i", p2="1+0i", eps="0.2",
                    experiment="geometry-check", outdir=tmp_path / "o")
    assert main(["validate", str(bad)]) == 2
    assert "distinct" in capsys.readouterr().err

    toobig = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.3",
                       experiment="geometry-check", outdir=tmp_path / "o")
    assert main(["validate", str(toobig)]) == 2
    assert "enclose" in capsys.readouterr().err

    unknown = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                        experiment="frobnicate", outdir=tmp_path / "o")
    assert main(["validate", str(unknown)]) == 2

    missing = tmp_path / "missing.ini"
    missing.write_text("[algebra]\nname = su(2)\n")
    assert main(["validate", str(missing)]) == 2


def test_geometry_check_symmetric_points(tmp_path):
    out = tmp_path / "geo"
    cfg = write_cfg(tmp_path, p1="1+0i", p2="-1+0i", eps="0.2",
                    experiment="geometry-check", outdir=out)
    assert main(["run", str(cfg)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "pass"
    assert len(summary["config_hash"]) == 40
    doc = json.loads((out / "geometry.json").read_text())
    om = np.array(doc["omega3"])     # (d, d, d, 2) pairs
    assert np.max(np.abs(om)) < 1e-10


def test_identity_check_runs_and_passes(tmp_path):
    out = tmp_path / "ident"
    cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                    experiment="identity-check", outdir=out)
    assert main(["run", str(cfg)]) == 0
    report = json.loads((out / "identity_report.json").read_text())
    assert report["passed"]


def test_simulate_writes_trajectories_and_report(tmp_path, capsys):
    out = tmp_path / "sim"
    cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                    experiment="simulate", outdir=out)
    assert main(["run", str(cfg)]) == 0
    for name in ("trajectory_j1.csv", "trajectory_j2.csv"):
        rows = list(csv.reader((out / name).open()))
        assert rows[0] == ["i1", "i2", "component", "re", "im"]
        assert len(rows) == 1 + 24 * 24 * 3
    assert main(["report", str(out)]) == 0
    assert "simulate" in capsys.readouterr().out


def test_charges_and_lax_scan(tmp_path):
    out = tmp_path / "ch"
    cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                    experiment="charges", outdir=out)
    assert main(["run", str(cfg)]) == 0
    rows = list(csv.reader((out / "charges.csv").open()))
    assert rows[0] == ["z_re", "z_im", "k", "t2_index", "value_re", "value_im", "drift"]
    out2 = tmp_path / "lx"
    cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                    experiment="lax-scan", outdir=out2)
    assert main(["run", str(cfg)]) == 0


def test_beta_flow_experiment(tmp_path):
    out = tmp_path / "bf"
    cfg = write_cfg(tmp_path, p1="1+0i", p2="2+0i", eps="0.2",
                    experiment="beta-flow", outdir=out)
    assert main(["run", str(cfg)]) == 0
    report = json.loads((out / "beta_report.json").read_text())
    dp2 = report["dP2_deps"]
    assert abs(complex(dp2[0], dp2[1]) - 1.0) < 1e-6


def test_runs_are_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        cfg = write_cfg(tmp_path, p1="2+0i", p2="1+0i", eps="0.2",
                        experiment="charges", outdir=out)
        assert main(["run", str(cfg)]) == 0
    for name in ("charges.csv",):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    sa = json.loads((out_a / "summary.json").read_text())
    sb = json.loads((out_b / "summary.json").read_text())
    sa.pop("config_hash"), sb.pop("config_hash")  # differ via output_dir key
    assert sa == sb


def test_csv_initial_data_roundtrip(tmp_path):
    csv_path = tmp_path / "init.csv"
    with csv_path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        n1 = 16
        for i in range(n1):
            t = i / n1
            for a, amp in ((0, 0.2), (1, 0.1), (2, 0.0)):
                lam = amp * np.cos(2 * np.pi * t)
                wr.writerow([i, a, repr(float(lam)), "0.0", "0.1", "0.0"])
    text = BASE.format(p1="2+0i", p2="1+0i", eps="0.2",
                       experiment="simulate", outdir=tmp_path / "sim2")
    text = text.replace("init = random-fourier",
                        f"init = csv\ncsv = {csv_path}").replace("n1 = 24", "n1 = 16")
    cfg = tmp_path / "exp2.ini"
    cfg.write_text(text)
    assert main(["run", str(cfg)]) == 0


def test_report_missing_directory(tmp_path, capsys):
    assert main(["report", str(tmp_path / "nope")]) == 2
