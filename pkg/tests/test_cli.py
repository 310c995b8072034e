import csv
import json
import math

import numpy as np
import pytest

from zoomrbf.cli import main
from zoomrbf.experiment import Q_POINT, paper_target
from zoomrbf.geometry import read_point_set

SMALL = {
    "global_counts": [200],
    "caps": [{"center": list(Q_POINT), "radius": math.pi / 12}],
    "local_counts": [[300]],
    "delta1": 0.25,
    "ratio": 0.5,
    "grid_resolution_deg": 0.5,
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(SMALL))
    return path


def test_no_arguments(capsys):
    assert main([]) != 0
    assert "usage" in capsys.readouterr().err


def test_unknown_command():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_verify_kernel(capsys):
    assert main(["verify-kernel", "--delta", "1", "--ell-max", "50"]) == 0
    lines = capsys.readouterr().out.splitlines()
    rows = [ln.split() for ln in lines[1:] if ln.split()[0].isdigit()]
    assert [int(r[0]) for r in rows] == list(range(51))
    assert all(float(r[1]) > 0 for r in rows)
    assert lines[-1].startswith("c_low")


def test_verify_kernel_rejects_small_range(capsys):
    assert main(["verify-kernel", "--ell-max", "3"]) == 1
    assert "error" in capsys.readouterr().err


def test_gen_points(tmp_path):
    out = tmp_path / "pts.txt"
    assert main(["gen-points", "--count", "120", "--cap", "0,0,1,0.5", "--out", str(out)]) == 0
    ps = read_point_set(out)
    assert len(ps) == 120 and np.all(ps.region.contains(ps.points))


def test_gen_points_bad_cap():
    with pytest.raises(SystemExit):
        main(["gen-points", "--count", "10", "--cap", "0,0,1", "--out", "x"])


def test_fit_then_evaluate(tmp_path, small_config, capsys):
    model = tmp_path / "model.txt"
    assert main(["-q", "fit", "--schedule", str(small_config), "--out", str(model)]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0] == "level,N,delta,h,kappa,node_residual" and len(table) == 3

    pts = tmp_path / "pts.txt"
    # '=' keeps argparse from reading the leading minus as an option
    main(["-q", "gen-points", "--count", "300", f"--cap={','.join(map(repr, Q_POINT))},{math.pi / 12!r}",
          "--out", str(pts)])
    vals = tmp_path / "vals.txt"
    assert main(["-q", "evaluate", "--model", str(model), "--points", str(pts), "--out", str(vals)]) == 0
    got = np.loadtxt(vals)
    # the last level interpolates at exactly these nodes
    f = paper_target(read_point_set(pts).points)
    assert np.allclose(got, f, rtol=1e-7)


def test_reproduce_csv_deterministic(tmp_path, small_config, capsys):
    a, b, g = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "g.csv"
    for out in (a, b):
        assert main(["-q", "reproduce-table1", "--config", str(small_config), "--out-csv", str(out),
                     "--out-grid", str(g)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert rows[0] == ["level", "N", "delta", "h", "l2_error", "kappa"] and len(rows) == 3
    assert "l2_error" in capsys.readouterr().out


def test_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(dict(SMALL, delta1=3.0)))
    assert main(["reproduce-table2", "--config", str(bad)]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("zoomrbf reproduce-table2: error:")


def test_missing_file(tmp_path):
    assert main(["evaluate", "--model", str(tmp_path / "nope"), "--points", str(tmp_path / "nope")]) == 1


@pytest.mark.slow
def test_reproduce_table1_default(tmp_path):
    out = tmp_path / "t1.csv"
    assert main(["-q", "--threads", "2", "reproduce-table1", "--out-csv", str(out)]) == 0
    assert len(list(csv.reader(out.open()))) == 10
