import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hsfrac import cli
from hsfrac.fields import Bump
from hsfrac.params import Params, omega
from hsfrac.problem import EvalReport, ProblemSpec, SpecError, dumps, grid_points, validate_problem
from hsfrac.solvers import BumpSum
from hsfrac.suites import _ode_oracle


def base_doc(**extra):
    doc = {
        "schema_version": 1,
        "params": {"N": 1, "m": 0, "sigma": 1.0},
        "f": [{"center": [1.5], "radius": 0.5}],
        "grid": {"kind": "list", "points": [[0.5], [1.2], [3.0]]},
    }
    doc.update(extra)
    return doc


def run_cli(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# --------------------------------------------------------------- problem


def test_problem_round_trip(tmp_path):
    doc = base_doc(
        g=[{"center": [-2.0], "radius": 1.0, "weight": -0.5, "profile": "exp"}],
        h=[[{"center": [0.0], "radius": 1.0, "weight": 2.0}]],
        quad={"abs_tol": 1e-11},
        seed=7,
    )
    doc["params"]["sigma"] = 0.5
    spec = ProblemSpec.from_dict(doc)
    again = ProblemSpec.from_dict(json.loads(dumps(spec.to_dict())))
    assert again == spec
    path = tmp_path / "p.json"
    spec.dump(path)
    assert ProblemSpec.load(path) == spec
    assert spec.cfg.abs_tol == 1e-11 and spec.seed == 7


def test_h_is_padded_to_m_plus_one():
    doc = base_doc(h=[[{"center": [0.0], "radius": 1.0, "q": 9}]])
    doc["params"] = {"N": 1, "m": 2, "sigma": 0.5}
    del doc["f"]
    spec = ProblemSpec.from_dict(doc)
    assert len(spec.h) == 3 and spec.h[1].is_empty and spec.h[2].is_empty
    doc["h"] = [[], [], [], []]
    with pytest.raises(SpecError, match="at most m\\+1"):
        ProblemSpec.from_dict(doc)


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d["params"].update(N=4), "params/N"),
        (lambda d: d["params"].update(sigma=0.0), "params/sigma"),
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d["f"][0].update(radius=-1), "f/0/radius"),
        (lambda d: d["grid"].update(kind="spiral"), "grid/kind"),
        (lambda d: d.update(extra=1), "<root>"),
        (lambda d: d.pop("params"), "<root>"),
    ],
)
def test_schema_errors_name_the_field(mutate, field):
    doc = base_doc()
    mutate(doc)
    with pytest.raises(SpecError) as exc:
        validate_problem(doc)
    assert field in str(exc.value)


def test_data_errors_surface():
    doc = base_doc(f=[{"center": [0.2], "radius": 0.5}])
    with pytest.raises(Exception, match="x1 > 0"):
        ProblemSpec.from_dict(doc)
    doc = base_doc(f=[{"center": [1.5], "radius": 0.5, "q": 2}])
    doc["params"] = {"N": 1, "m": 1, "sigma": 0.5}
    with pytest.raises(Exception, match="q=2"):
        ProblemSpec.from_dict(doc)


def test_load_reports_json_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": 1,\n  "params": }')
    with pytest.raises(SpecError, match="line 2 column"):
        ProblemSpec.load(path)


def test_grid_points():
    g = grid_points({"kind": "log", "lo": -1, "hi": 1, "n": 3, "tangential": [[0.0], [2.0]]}, 2)
    assert g.shape == (6, 2) and g[0, 0] == 0.5
    g = grid_points({"kind": "linear", "lo": 1, "hi": 2, "n": 3}, 1)
    assert np.allclose(g[:, 0], [1, 1.5, 2])
    assert grid_points({"kind": "list", "points": []}, 3).shape == (0, 3)
    with pytest.raises(SpecError):
        grid_points({"kind": "list", "points": [[1.0]]}, 2)
    with pytest.raises(SpecError):
        grid_points({"kind": "log", "lo": 0, "n": 3}, 1)


def test_report_layout():
    rep = EvalReport("solve", {"a": 1})
    rep.add("values", [{"x": np.array([1.0]), "u": np.float64(2.0)}])
    d = json.loads(rep.dumps())
    assert d["schema_version"] == 1 and d["kind"] == "solve" and "passed" not in d
    assert d["values"][0]["x"] == [1.0]
    assert dumps({"b": 1, "a": float("inf")}) == '{\n  "a": "inf",\n  "b": 1\n}\n'


# ------------------------------------------------------------ eval-kernel


def test_eval_kernel_green_csv(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("x1,y1\n1,2\n\n0.5,3\n")
    code, out, _ = run_cli(["eval-kernel", "--kernel", "green", "--N", "1", "--m", "0", "--sigma", "1", "--points", str(pts)], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x1", "y1", "value"]
    assert float(rows[1][2]) == pytest.approx(1.0, rel=1e-12)
    assert float(rows[2][2]) == pytest.approx(0.5, rel=1e-12)


def test_eval_kernel_boundary_json(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("0.7,0.2,0,-0.4\n")
    out_path = tmp_path / "k.json"
    code, _, _ = run_cli(
        ["eval-kernel", "--kernel", "boundary:1", "--N", "2", "--m", "1", "--sigma", "0.5", "--points", str(pts), "--format", "json", "--out", str(out_path)],
        capsys,
    )
    assert code == 0
    doc = json.loads(out_path.read_text())
    x, y = np.array([0.7, 0.2]), np.array([0.0, -0.4])
    ref = 2 / omega(2) * 0.7**1.5 / float((x - y) @ (x - y))
    assert doc["rows"][0]["value"] == pytest.approx(ref, rel=1e-14)
    assert doc["kernel"] == "boundary:1" and "abs_tol" in doc["config"]


def test_eval_kernel_errors(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("1,-1\n")
    code, _, err = run_cli(["eval-kernel", "--kernel", "poisson", "--N", "1", "--m", "0", "--sigma", "1", "--points", str(pts)], capsys)
    assert code == 2 and "integer s" in err
    code, _, err = run_cli(["eval-kernel", "--kernel", "boundary:2", "--N", "1", "--m", "1", "--sigma", "0.5", "--points", str(pts)], capsys)
    assert code == 2 and "outside 0..1" in err
    pts.write_text("1,2,3\n")
    code, _, err = run_cli(["eval-kernel", "--kernel", "green", "--N", "1", "--m", "0", "--sigma", "1", "--points", str(pts)], capsys)
    assert code == 2 and "expected 2 columns" in err
    code, _, err = run_cli(["eval-kernel", "--kernel", "green", "--N", "1", "--m", "0", "--sigma", "1", "--points", str(tmp_path / "nope.csv")], capsys)
    assert code == 2


# ------------------------------------------------------------------ solve


def _write(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def test_solve_matches_ode_oracle(tmp_path, capsys):
    spec = _write(tmp_path, base_doc())
    out = tmp_path / "r.json"
    table = tmp_path / "r.csv"
    code, _, _ = run_cli(["solve", "--spec", str(spec), "--out", str(out), "--csv", str(table)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    for row in doc["values"]:
        assert row["u"] == pytest.approx(_ode_oracle(row["x"][0], 1.5, 0.5, 8), rel=1e-8)
    assert doc["config"]["quad"]["abs_tol"] > 0 and "backend" in doc["config"]
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["x1", "u"] and len(rows) == 4


def test_solve_is_deterministic(tmp_path, capsys):
    spec = _write(tmp_path, base_doc(seed=3))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli(["solve", "--spec", str(spec), "--out", str(a)], capsys)
    run_cli(["solve", "--spec", str(spec), "--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_solve_empty_data_gives_zero(tmp_path, capsys):
    doc = base_doc()
    del doc["f"]
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["solve", "--spec", str(_write(tmp_path, doc)), "--out", str(out)], capsys)
    assert code == 0
    assert all(row["u"] == 0.0 for row in json.loads(out.read_text())["values"])


def test_solve_boundary_only_1d(tmp_path, capsys):
    doc = {
        "schema_version": 1,
        "params": {"N": 1, "m": 1, "sigma": 0.5},
        "h": [[{"center": [0.0], "radius": 1.0, "weight": 0.7}], [{"center": [0.0], "radius": 2.0, "weight": -1.1}]],
        "grid": {"kind": "log", "lo": -2, "hi": 3, "n": 6},
    }
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["solve", "--spec", str(_write(tmp_path, doc)), "--out", str(out), "--check-traces"], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["passed"] is True
    s = 1.5
    for row in rep["values"]:
        x = row["x"][0]
        assert row["u"] == pytest.approx(0.7 * x ** (s - 2) - 1.1 * x ** (s - 1), rel=1e-12)


def test_solve_residual_check(tmp_path, capsys):
    doc = base_doc()
    doc["params"]["sigma"] = 0.5
    doc["f"] = [{"center": [2.0], "radius": 1.0}]
    doc["grid"] = {"kind": "list", "points": [[1.5], [2.0]]}
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["solve", "--spec", str(_write(tmp_path, doc)), "--out", str(out), "--check-residual"], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["passed"] is True
    assert rep["residual"]["max_abs_error"] <= rep["residual"]["tol"]


def test_solve_schema_error_exit(tmp_path, capsys):
    doc = base_doc()
    doc["params"]["N"] = 9
    code, _, err = run_cli(["solve", "--spec", str(_write(tmp_path, doc)), "--out", str(tmp_path / "r.json")], capsys)
    assert code == 2 and "params/N" in err


# ----------------------------------------------------------------- verify


def test_verify_identities(tmp_path, capsys):
    out = tmp_path / "v.json"
    code, _, err = run_cli(["verify", "--suite", "identities", "--fast", "--out", str(out)], capsys)
    assert code == 0 and "identities:" in err
    rep = json.loads(out.read_text())
    assert rep["passed"] is True and rep["summary"]["failed"] == 0
    assert all("tol" in c for c in rep["checks"])


def test_verify_harmonic_and_kelvin(capsys):
    assert run_cli(["verify", "--suite", "harmonic", "--s", "0.5"], capsys)[0] == 0
    assert run_cli(["verify", "--suite", "kelvin", "--fast"], capsys)[0] == 0


def test_verify_failure_exit(monkeypatch, capsys):
    from hsfrac import suites

    bad = suites.Check("fake", "always", 1.0, 0.0, 1.0, 1e-3, "abs")
    monkeypatch.setattr(suites, "run_suite", lambda *a, **k: [bad] * 12)
    code, _, err = run_cli(["verify", "--suite", "kernels"], capsys)
    assert code == 1 and "FAIL fake/always" in err and "2 more failures" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "hsfrac", "verify", "--suite", "identities", "--fast"], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
