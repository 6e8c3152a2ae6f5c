import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

import dcesim.cli
from dcesim import (SweepAxis, SweepSpec, figure_base, reproduce_figure,
                    run_sweep)
from dcesim.errors import NumericalError, UnknownParameter, ValidationError

_BASE_CFG = """\
# effective working point
delta = 5e3
Omega_M = 1e4
G0 = 101.45994390899928
kappa = 500
F = 2e5
"""


def _run_cli(*argv, cwd=None):
    return subprocess.run([sys.executable, "-m", "dcesim", *argv],
                          capture_output=True, text=True, cwd=cwd)


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "point.cfg"
    path.write_text(_BASE_CFG)
    return str(path)


def test_axis_values():
    lin = SweepAxis("F", 1.0, 5.0, 5)
    assert np.allclose(lin.values(), [1, 2, 3, 4, 5])
    log = SweepAxis("kappa", 1.0, 100.0, 3, scale="log")
    assert np.allclose(log.values(), [1.0, 10.0, 100.0])
    with pytest.raises(ValidationError):
        SweepAxis("F", 1.0, 2.0, 1).values()
    with pytest.raises(ValidationError):
        SweepAxis("F", -1.0, 2.0, 3, scale="log").values()
    with pytest.raises(ValidationError):
        SweepAxis("F", 1.0, 2.0, 3, scale="cubic").values()


def test_run_sweep_rows_and_rerun_identical(tmp_path):
    out = str(tmp_path / "s.csv")
    spec = SweepSpec(axis1=SweepAxis("F", 6e4, 4e5, 7),
                     branch_policy="all", observables=("z", "n_cav", "E_N"),
                     output=out, fmt="csv")
    result = run_sweep(spec, figure_base())
    header, rows = _read_csv(out)
    assert header[:3] == ["F", "branch", "stable"]
    assert {"z", "n_cav", "E_N"} <= set(header)
    assert len(rows) == len(result.rows)
    # every grid value shows up, each with 1..3 branch rows
    f_col = [float(r[0]) for r in rows]
    assert sorted(set(f_col)) == pytest.approx(list(np.linspace(6e4, 4e5, 7)))
    first = open(out, "rb").read()
    run_sweep(spec, figure_base())
    assert open(out, "rb").read() == first


def test_grid_independence_1d_vs_2d(tmp_path):
    # a 1-point second axis pinned at the base value must not change rows
    base = figure_base()
    out1 = str(tmp_path / "a.csv")
    out2 = str(tmp_path / "b.csv")
    run_sweep(SweepSpec(axis1=SweepAxis("F", 1e5, 3e5, 3),
                        observables=("z", "E_N"), output=out1), base)
    run_sweep(SweepSpec(axis1=SweepAxis("F", 1e5, 3e5, 3),
                        axis2=SweepAxis("kappa", base.kappa, base.kappa, 2),
                        observables=("z", "E_N"), output=out2), base)
    _, rows1 = _read_csv(out1)
    _, rows2 = _read_csv(out2)
    assert len(rows1) == 9  # three F values, all tri-valued under policy all
    assert len(rows2) == 2 * len(rows1)
    # grid order is F outer, kappa inner: rows2 holds two kappa copies of
    # each F chunk; both copies sit at the base kappa so both must match
    for i in range(3):
        chunk1 = rows1[3 * i:3 * i + 3]
        for copy in range(2):
            chunk2 = rows2[6 * i + 3 * copy:6 * i + 3 * copy + 3]
            for r1, r2 in zip(chunk1, chunk2):
                assert r1[0] == r2[0]  # F cell
                assert r1[1:] == r2[2:]  # branch onward, past the kappa cell


def test_empty_observables_header_only(tmp_path):
    out = str(tmp_path / "h.csv")
    spec = SweepSpec(axis1=SweepAxis("F", 1e5, 2e5, 4), observables=(),
                     output=out)
    result = run_sweep(spec, figure_base())
    assert result.rows == []
    header, rows = _read_csv(out)
    assert rows == []
    assert header == ["F", "branch", "stable"]


def test_sidecar_row_correspondence(tmp_path):
    out = str(tmp_path / "w.csv")
    spec = SweepSpec(axis1=SweepAxis("F", 1e5, 2e5, 2),
                     branch_policy="follow-stable",
                     observables=("z", "S_theta_scan"), output=out)
    result = run_sweep(spec, figure_base())
    header, rows = _read_csv(out)
    scan_col = header.index("scan_file")
    for idx, row in enumerate(rows):
        name = row[scan_col]
        assert name == f"w_row{idx:05d}_scan.csv"
        side = os.path.join(str(tmp_path), name)
        assert os.path.exists(side)
        sh, srows = _read_csv(side)
        assert sh == ["theta", "s_theta"]
        assert len(srows) > 10
    assert len(result.files) == 1 + len(rows)


def test_mixed_route_axis_rejected(tmp_path):
    spec = SweepSpec(axis1=SweepAxis("delta_s", 1.0, 2.0, 2),
                     output=str(tmp_path / "x.csv"))
    with pytest.raises(UnknownParameter):
        run_sweep(spec, figure_base())


def test_branch_policy_miss_flagged(tmp_path):
    # ask for the upper branch where only the single branch exists
    out = str(tmp_path / "m.csv")
    spec = SweepSpec(axis1=SweepAxis("F", 1e3, 2e3, 2),
                     branch_policy="upper", observables=("z",), output=out)
    run_sweep(spec, figure_base())
    header, rows = _read_csv(out)
    b = header.index("branch")
    s = header.index("stable")
    z = header.index("z")
    for row in rows:
        assert row[b] == "none"
        assert row[s] == "false"
        assert row[z] == ""


def test_cli_steady_stdout(cfg_file):
    proc = _run_cli("steady", "--config", cfg_file)
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.strip().splitlines()
    assert lines[0].split(",")[0] == "branch"
    assert len(lines) == 4  # header + three branches
    upper = dict(zip(lines[0].split(","), lines[3].split(",")))
    assert upper["branch"] == "upper"
    assert upper["stable"] == "true"
    assert float(upper["z"]) == pytest.approx(6767.56349782061, rel=1e-9)
    assert float(upper["E_N"]) == pytest.approx(0.36047369220239306, rel=1e-7)


def test_cli_set_overrides_config(cfg_file, tmp_path):
    out = str(tmp_path / "steady.json")
    proc = _run_cli("steady", "--config", cfg_file, "--set", "F=1e3",
                    "--format", "json", "--out", out)
    assert proc.returncode == 0, proc.stderr
    rows = json.loads(open(out).read())
    assert len(rows) == 1  # weak drive: single branch
    assert rows[0]["branch"] == "lower"
    assert rows[0]["z"] < 1.01


def test_cli_rejects_unknown_key(cfg_file):
    proc = _run_cli("steady", "--config", cfg_file, "--set", "detuning=5")
    assert proc.returncode == 2
    assert "dcesim: error:" in proc.stderr
    assert "detuning" in proc.stderr


def test_cli_rejects_bad_value(cfg_file):
    proc = _run_cli("steady", "--config", cfg_file, "--set", "kappa=fast")
    assert proc.returncode == 2
    assert "dcesim: error:" in proc.stderr


def test_cli_rejects_missing_config():
    proc = _run_cli("steady", "--config", "/nonexistent/p.cfg")
    assert proc.returncode == 2


def test_cli_sweep_roundtrip(cfg_file, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(_BASE_CFG + "axis1.name = F\naxis1.start = 1e5\n"
                   "axis1.stop = 3e5\naxis1.count = 3\n"
                   "observables = z,E_N\nbranch_policy = follow-stable\n")
    out = str(tmp_path / "fresh" / "dir" / "sw.csv")  # parents get created
    proc = _run_cli("sweep", "--config", str(cfg), "--out", out)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("wrote 3 rows to ")
    header, rows = _read_csv(out)
    assert len(rows) == 3
    assert all(r[header.index("stable")] == "true" for r in rows)


def test_cli_sweep_json_format(cfg_file, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(_BASE_CFG + "axis1.name = F\naxis1.start = 1e5\n"
                   "axis1.stop = 2e5\naxis1.count = 2\nobservables = z\n")
    out = str(tmp_path / "sw.json")
    proc = _run_cli("sweep", "--config", str(cfg), "--out", out,
                    "--format", "json")
    assert proc.returncode == 0, proc.stderr
    payload = json.loads(open(out).read())
    assert payload["axes"] == {"F": [1e5, 2e5]}
    assert payload["branch_policy"] == "all"
    assert all("z" in row for row in payload["rows"])


def test_cli_spectrum_reports_gap(cfg_file, tmp_path):
    out = str(tmp_path / "sp.csv")
    proc = _run_cli("spectrum", "--config", cfg_file, "--set", "theta=0.785",
                    "--out", out)
    assert proc.returncode == 0, proc.stderr
    assert "integrated" in proc.stdout and "lyapunov" in proc.stdout
    header, rows = _read_csv(out)
    assert header == ["omega", "s_theta"]
    assert len(rows) > 100


def test_cli_wigner_unstable_branch_exit3(cfg_file):
    proc = _run_cli("wigner", "--config", cfg_file, "--set",
                    "branch_policy=middle")
    # middle is not a policy; picking it must fail fast as config error
    assert proc.returncode == 2


def test_cli_figure_unknown_tag(tmp_path):
    proc = _run_cli("figure", "nosuchfig", "--out", str(tmp_path), )
    assert proc.returncode == 2
    assert "dcesim: error:" in proc.stderr


def test_cli_figure_fig2a(tmp_path):
    proc = _run_cli("figure", "fig2a", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    path = os.path.join(str(tmp_path), "fig2a.csv")
    assert os.path.exists(path)
    header, rows = _read_csv(path)
    assert header[0] == "F"
    assert len(rows) == 60
    tri = [r for r in rows if r[header.index("z_middle")] != ""]
    assert len(tri) > 30  # most of the span is inside the bistable window


def test_cli_numerical_failure_exit3(cfg_file, monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericalError("synthetic failure")

    monkeypatch.setattr(dcesim.cli, "mechanical_variance_spectral", boom)
    rc = dcesim.cli.main(["spectrum", "--config", cfg_file])
    captured = capsys.readouterr()
    assert rc == 3
    assert "dcesim: numerical failure:" in captured.err


def test_figure_tag_api(tmp_path):
    files = reproduce_figure("fig2a", out_dir=str(tmp_path))
    assert files and all(os.path.exists(f) for f in files)
    from dcesim.errors import UnknownFigureTag
    with pytest.raises(UnknownFigureTag):
        reproduce_figure("fig9z", out_dir=str(tmp_path))
