import json
import re

import numpy as np
import pytest

from finadapt import corpus, io
from finadapt.cli import main
from finadapt.errors import InstanceFormatError, NotTwoDimensional
from finadapt.model import Solution
from finadapt.render import piece_polygons, render_svg
from finadapt.solvers import solve_adapt2_enum, solve_adapt3_enum


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def exported(tmp_path):
    def export(name):
        inst_path = tmp_path / f"{name}.json"
        ref_path = tmp_path / f"{name}-ref.json"
        assert main(["export", name, "--out", str(inst_path), "--reference-out", str(ref_path)]) == 0
        return inst_path, ref_path

    return export


def test_solve_square(capsys, tmp_path):
    out = tmp_path / "sol.json"
    code, stdout, _ = run(capsys, "solve", "--k", 2, "--method", "enum", "--instance", "square", "--out", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["objective"] == pytest.approx(2)
    assert doc["k"] == 2
    assert doc["certificate"]["verdict"] == "covered"
    assert len(doc["pieces"]) == 2


def test_solve_exit_codes(capsys, tmp_path):
    out = tmp_path / "sol.json"
    assert run(capsys, "solve", "--k", 2, "--method", "enum", "--instance", "R", "--out", out)[0] == 5
    assert run(capsys, "solve", "--k", 1, "--instance", "interval", "--out", out)[0] == 2
    assert json.loads(out.read_text())["status"] == "infeasible"
    assert run(capsys, "solve", "--k", 3, "--method", "milp", "--instance", "square", "--out", out)[0] == 4
    assert run(capsys, "solve", "--k", 2, "--method", "1d", "--instance", "square", "--out", out)[0] == 5
    assert run(capsys, "solve", "--k", 7, "--instance", "square")[0] == 4
    assert run(capsys, "solve", "--k", 2, "--instance", tmp_path / "missing.json")[0] == 4
    assert run(capsys, "solve", "--k", 2, "--method", "enum", "--big-m", 3, "--instance", "square")[0] == 4


def test_solve_unbounded(capsys, tmp_path):
    doc = io.instance_to_json(corpus.get_instance("deterministic").instance)
    doc["c"] = [-1.0]
    doc["b"]["const"] = [3.0]
    path = tmp_path / "unb.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "solve", "--k", 1, "--instance", path, "--out", tmp_path / "o.json")[0] == 3


def test_solve_methods_agree(capsys, tmp_path):
    values = {}
    for method, k in (("enum", 2), ("milp", 2), ("1d", 2), ("comp", 2)):
        out = tmp_path / f"{method}.json"
        assert run(capsys, "solve", "--k", k, "--method", method, "--instance", "interval", "--out", out)[0] == 0
        values[method] = json.loads(out.read_text())["objective"]
    assert values["enum"] == pytest.approx(1) and values["milp"] == pytest.approx(1)
    assert values["1d"] == pytest.approx(1) and values["comp"] == pytest.approx(1)


def test_solve_flags(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, *_ = run(capsys, "solve", "--k", 2, "--instance", "square", "--out", out,
                   "--no-symmetry-pruning", "--threads", 2)
    assert code == 0
    assert json.loads(out.read_text())["candidates_explored"] == 81


def test_verify_command(capsys, tmp_path, exported):
    inst_path, ref_path = exported("P")
    code, stdout, _ = run(capsys, "verify", "--instance", inst_path, "--solution", ref_path)
    assert code == 0 and "COVERED" in stdout
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"x": [0, 0, 0, 0], "ys": [[5]], "objective": 0}))
    code, stdout, _ = run(capsys, "verify", "--instance", inst_path, "--solution", bad)
    assert code == 2
    assert "witness" in stdout
    trunc = tmp_path / "trunc.json"
    trunc.write_text('{"x": [0, 0')
    code, _, err = run(capsys, "verify", "--instance", inst_path, "--solution", trunc)
    assert code == 4 and "line" in err


def test_verify_objective_mismatch(capsys, tmp_path, exported):
    inst_path, _ = exported("P")
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"x": [2, 2, 0, 2], "ys": [[2]], "objective": 1}))
    assert run(capsys, "verify", "--instance", inst_path, "--solution", wrong)[0] == 2


def test_lowerbound_command(capsys, tmp_path):
    q = tmp_path / "q.json"
    q.write_text('["0", "1/3", "2/3", "1"]')
    code, stdout, _ = run(capsys, "lowerbound", "--instance", "Q", "--k", 3, "--scenarios", q)
    assert code == 2 and "INFEASIBLE" in stdout
    p = tmp_path / "p.json"
    p.write_text("[0, 0.5, 1]")
    code, stdout, _ = run(capsys, "lowerbound", "--instance", "P", "--k", 2, "--scenarios", p)
    assert code == 0 and float(stdout.split(":")[1]) == pytest.approx(2, abs=1e-6)
    p.write_text("[0]")
    code, stdout, _ = run(capsys, "lowerbound", "--instance", "P", "--k", 2, "--scenarios", p)
    assert code == 0 and float(stdout.split(":")[1]) == pytest.approx(0, abs=1e-6)
    code, stdout, _ = run(capsys, "lowerbound", "--instance", "triangle", "--k", 3, "--grid", 5)
    assert code == 0 and float(stdout.split(":")[1]) <= 1.6 + 1e-6
    assert run(capsys, "lowerbound", "--instance", "square", "--k", 2, "--grid", 1)[0] == 4
    p.write_text("[[5, 5]]")
    assert run(capsys, "lowerbound", "--instance", "square", "--k", 2, "--scenarios", p)[0] == 4


def test_render_command(capsys, tmp_path, exported):
    inst_path, ref_path = exported("R")
    svg = tmp_path / "r.svg"
    assert run(capsys, "render", "--instance", inst_path, "--solution", ref_path, "--out", svg)[0] == 0
    text = svg.read_text()
    assert text.startswith("<svg") and 'width="600"' in text and text.count('class="piece"') == 2
    again = tmp_path / "r2.svg"
    run(capsys, "render", "--instance", inst_path, "--solution", ref_path, "--out", again)
    assert again.read_bytes() == svg.read_bytes()
    sol = tmp_path / "i.json"
    run(capsys, "solve", "--k", 2, "--instance", "interval", "--out", sol)
    assert run(capsys, "render", "--instance", "interval", "--solution", sol, "--out", tmp_path / "i.svg")[0] == 5


def _svg_polygons(text):
    polys = []
    for pts in re.findall(r'class="piece" data-piece="\d+" points="([^"]+)"', text):
        polys.append(np.array([[float(a), -float(b)] for a, b in (p.split(",") for p in pts.split())]))
    return polys


def _same_vertex_set(a, b, tol=1e-6):
    return len(a) == len(b) and all(np.min(np.max(np.abs(b - p), axis=1)) <= tol for p in a)


def test_render_r_hexagons():
    e = corpus.get_instance("R")
    sol = e.reference_solutions[0][0]
    polys = _svg_polygons(render_svg(e.instance, sol))
    for poly, expected in zip(polys, corpus.R_PIECES):
        assert _same_vertex_set(poly, np.array(expected, float))
    assert len(polys) == 2


def test_render_square_slabs():
    sq = corpus.get_instance("square").instance
    sol = solve_adapt2_enum(sq).solution
    polys = piece_polygons(sq, sol)
    assert len(polys) == 2 and all(len(p) >= 3 for p in polys)
    with pytest.raises(NotTwoDimensional):
        piece_polygons(corpus.get_instance("interval").instance, sol)


def test_export_to_stdout(capsys):
    code, stdout, _ = run(capsys, "export", "triangle")
    assert code == 0
    assert json.loads(stdout)["name"] == "triangle"


@pytest.mark.parametrize("name", corpus.names())
def test_round_trip(tmp_path, name):
    inst = corpus.get_instance(name).instance
    path = tmp_path / "inst.json"
    io.save_instance(inst, path)
    back = io.load_instance(path)
    assert io.instance_to_json(back) == io.instance_to_json(inst)
    if inst.is_deterministic_AB():
        for solver in (solve_adapt2_enum, solve_adapt3_enum):
            a, b = solver(inst), solver(back)
            assert a.status == b.status
            if a.feasible:
                assert a.solution.objective == b.solution.objective


def test_solution_round_trip(tmp_path):
    sq = corpus.get_instance("square").instance
    sol = solve_adapt2_enum(sq).solution
    path = tmp_path / "s.json"
    io.save_json(io.solution_to_json(sol), path)
    back = io.load_solution(path)
    assert back.objective == sol.objective
    assert [y.tolist() for y in back.ys] == [y.tolist() for y in sol.ys]


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.pop("c"), "'c'"),
    (lambda d: d["b"].update(const="abc"), "'b'"),
    (lambda d: d["A"].update(const=[[1, 2, 3]]), "A.const"),
    (lambda d: d["b"].update(coeffs=[[1.0]]), "b.coeffs"),
    (lambda d: d.update(y_bounds=[[0, 1], [0, 1]]), "y_bounds"),
])
def test_bad_instance_files(mutate, field):
    doc = io.instance_to_json(corpus.get_instance("square").instance)
    mutate(doc)
    with pytest.raises(InstanceFormatError, match=re.escape(field)):
        io.instance_from_json(doc)


def test_bad_solution_files():
    with pytest.raises(InstanceFormatError):
        io.solution_from_json({"x": [], "objective": 0})
    with pytest.raises(InstanceFormatError):
        io.solution_from_json({"x": [], "ys": [[1]], "objective": 0, "k": 2})
    sol = io.solution_from_json({"x": [], "ys": [[1]], "objective": 0})
    assert isinstance(sol, Solution)


def test_tolerances_from_env(monkeypatch):
    from finadapt.config import Tolerances, tolerances_from_env

    assert tolerances_from_env("") == Tolerances()
    t = tolerances_from_env("1e-8")
    assert t.feasibility == t.optimality == 1e-8
    t = tolerances_from_env("feasibility=1e-8, integrality=1e-5")
    assert t.feasibility == 1e-8 and t.integrality == 1e-5
    with pytest.raises(ValueError):
        tolerances_from_env("bogus=1")
    monkeypatch.setenv("FINADAPT_TOL", "verify=1e-4")
    assert tolerances_from_env().verify == 1e-4
