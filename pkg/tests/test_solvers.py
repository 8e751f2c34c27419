import math
import warnings

import numpy as np
import pytest

from finadapt import corpus, solvers
from finadapt.covers import skeleton_coverage_gaps
from finadapt.errors import (
    BigMTooSmall,
    BigMTooSmallWarning,
    NotOneDimensional,
    RequiresDeterministicAB,
    ScenarioOutsideOmega,
)
from finadapt.geometry import contains_point
from finadapt.lp import Status
from finadapt.model import AffineMap, Instance, Method, Solution
from finadapt.solvers import (
    recover_cover,
    solve_adapt1,
    solve_adapt2_enum,
    solve_adapt2_milp,
    solve_adapt3_enum,
    solve_adapt_1d,
    solve_comp_adapt,
    solve_scenario_lb,
)
from finadapt.verify import verify_cover


def inst(name):
    return corpus.get_instance(name).instance


def test_adapt1():
    assert solve_adapt1(inst("interval")).status is Status.INFEASIBLE
    assert solve_adapt1(inst("square")).status is Status.INFEASIBLE
    rep = solve_adapt1(inst("deterministic"))
    assert rep.value == pytest.approx(3)
    assert rep.solution.x == pytest.approx([3])


def test_comp_adapt():
    assert solve_comp_adapt(inst("interval")).value == pytest.approx(1)
    rep = solve_comp_adapt(inst("square"))
    assert rep.value == pytest.approx(2)
    assert rep.solution.method is Method.COMP
    assert rep.solution.k == 4
    assert solve_comp_adapt(inst("deterministic")).value == pytest.approx(3)


def test_one_dimensional():
    rep = solve_adapt_1d(inst("interval"), 2)
    assert rep.value == pytest.approx(1)
    assert rep.solution.info["breakpoints"] == pytest.approx([0.5])
    assert [y[0] for y in rep.solution.ys] == pytest.approx([0.5, 1.0])
    assert solve_adapt_1d(inst("interval"), 1).status is Status.INFEASIBLE
    for k in (1, 2, 3, 4):
        assert solve_adapt_1d(inst("deterministic"), k).value == pytest.approx(3)


def test_one_dimensional_segment_in_the_plane():
    from finadapt.geometry import build_polytope

    # y >= w1 + w2 and y <= w1 + w2 + 1 along the diagonal from (0,0) to (1,1)
    omega = build_polytope([(0, 0), (1, 1)])
    problem = Instance(c=np.zeros(0), d=[1.0], A=AffineMap(np.zeros((2, 0)), np.zeros((2, 2, 0))),
                       B=AffineMap.constant([[-1.0], [1.0]], 2),
                       b=AffineMap([0.0, 1.0], [[-1.0, 1.0], [-1.0, 1.0]]), omega=omega)
    assert solve_adapt1(problem).status is Status.INFEASIBLE
    assert solve_adapt_1d(problem, 2).value == pytest.approx(2)
    assert solve_adapt2_enum(problem).value == pytest.approx(2)


def test_one_dimensional_rejects_planar_sets():
    with pytest.raises(NotOneDimensional):
        solve_adapt_1d(inst("square"), 2)


@pytest.mark.parametrize("solver", [solve_adapt1, solve_comp_adapt, solve_adapt2_enum,
                                    solve_adapt3_enum, solve_adapt2_milp])
@pytest.mark.parametrize("name", ["P", "Q", "R"])
def test_uncertain_matrices_rejected(solver, name):
    with pytest.raises(RequiresDeterministicAB):
        solver(inst(name))


def test_square_two_pieces():
    rep = solve_adapt2_enum(inst("square"))
    assert rep.value == pytest.approx(2, abs=1e-5)
    assert rep.candidates_explored <= 81
    raw = solve_adapt2_enum(inst("square"), symmetry=False)
    assert raw.candidates_explored == 81
    assert raw.value == pytest.approx(rep.value, abs=1e-9)
    # the pieces split the square along w1 + w2
    pieces = recover_cover(inst("square"), rep.solution)
    for piece in pieces:
        assert np.allclose(np.abs(piece.normals), 1.0)


def test_interval_two_pieces():
    assert solve_adapt2_enum(inst("interval")).value == pytest.approx(1)
    assert solve_adapt2_milp(inst("interval")).value == pytest.approx(1)


def test_triangle_three_pieces():
    tri = inst("triangle")
    rep = solve_adapt3_enum(tri)
    assert rep.value == pytest.approx(1.6, abs=1e-5)
    assert rep.candidates_explored <= 7 ** 6
    assert not solve_adapt2_enum(tri).feasible
    assert not solve_adapt2_milp(tri).feasible
    # the three second-stage values split the range [0, 2] of w1 + 2 w2
    ys = sorted(y[0] for y in rep.solution.ys)
    assert ys[-1] == pytest.approx(1.6, abs=1e-5)
    assert ys[0] <= 0.4 + 1e-6


def test_deterministic_instance_everywhere():
    det = inst("deterministic")
    for rep in (solve_adapt2_enum(det), solve_adapt3_enum(det), solve_adapt2_milp(det)):
        assert rep.value == pytest.approx(3)


def test_milp_agrees_with_enumeration_on_square():
    sq = inst("square")
    assert solve_adapt2_milp(sq).value == pytest.approx(solve_adapt2_enum(sq).value, abs=1e-5)


def test_milp_retries_with_larger_constant(monkeypatch):
    from finadapt import verify

    real = verify.verify_cover
    calls = []

    def flaky(instance, sol, *a, **kw):
        calls.append(1)
        cert = real(instance, sol, *a, **kw)
        if len(calls) == 1:
            cert.verdict = verify.Verdict.NOT_COVERED
        return cert

    monkeypatch.setattr(verify, "verify_cover", flaky)
    with pytest.warns(BigMTooSmallWarning):
        rep = solve_adapt2_milp(inst("square"))
    assert rep.value == pytest.approx(2)
    assert rep.solution.info["big_m"] == pytest.approx(2 * solvers.default_big_m(inst("square")))

    monkeypatch.setattr(verify, "verify_cover",
                        lambda *a, **kw: verify.CoverCertificate(verify.Verdict.NOT_COVERED))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BigMTooSmallWarning)
        with pytest.raises(BigMTooSmall):
            solve_adapt2_milp(inst("square"))


def test_threads_do_not_change_the_answer():
    problem = corpus.generate_random(13, 2, 4)
    a = solve_adapt3_enum(problem, threads=1)
    b = solve_adapt3_enum(problem, threads=3)
    assert a.value == b.value
    assert a.winning_candidate == b.winning_candidate
    assert [y.tobytes() for y in a.solution.ys] == [y.tobytes() for y in b.solution.ys]


def test_winning_skeleton_is_reported():
    rep = solve_adapt3_enum(inst("triangle"))
    assert rep.skeleton.is_valid()
    assert skeleton_coverage_gaps(rep.skeleton) == []
    assert rep.winning_candidate["k"] == 3


def test_scenario_bounds():
    assert solve_scenario_lb(inst("P"), [[0.0], [0.5], [1.0]], 2).value == pytest.approx(2, abs=1e-6)
    assert solve_scenario_lb(inst("P"), [[0.0]], 2).value == pytest.approx(0, abs=1e-6)
    q = solve_scenario_lb(inst("Q"), [[0.0], [1 / 3], [2 / 3], [1.0]], 3)
    assert q.status is Status.INFEASIBLE


def test_single_scenario_is_a_plain_lp():
    sq = inst("square")
    rep = solve_scenario_lb(sq, [[1.0, 1.0]], 1)
    # y >= 2 at (1, 1) and nothing else binds
    assert rep.value == pytest.approx(2)


def test_scenario_outside_omega():
    with pytest.raises(ScenarioOutsideOmega):
        solve_scenario_lb(inst("square"), [[2.0, 0.0]], 2)
    with pytest.raises(ScenarioOutsideOmega):
        solve_scenario_lb(inst("square"), [[0.5]], 2)


def test_scenario_bound_below_enumeration():
    rng = np.random.default_rng(5)
    for name in ("interval", "square", "triangle", "deterministic"):
        problem = inst(name)
        V = problem.omega.vertices
        exact = {1: solve_adapt1(problem).value, 2: solve_adapt2_enum(problem).value,
                 3: solve_adapt3_enum(problem).value}
        for _ in range(4):
            w = rng.dirichlet(np.ones(len(V)), size=int(rng.integers(1, 6)))
            pts = w @ V
            for k in (1, 2, 3):
                lb = solve_scenario_lb(problem, pts, k)
                assert lb.value <= exact[k] + 1e-6


def test_triangle_scenario_levels():
    # levels of w1 + 2 w2 pairwise further apart than the band width 0.8
    spread = [[0, 0], [0.9, 0], [0, 0.9]]
    assert solve_scenario_lb(inst("triangle"), spread, 2).status is Status.INFEASIBLE
    # levels {0, 0.7, 1.4, 2}: some piece serves two of them, the cheapest way costs 1.6
    levels = [[0, 0], [0.7, 0], [0, 0.7], [0, 1]]
    assert solve_scenario_lb(inst("triangle"), levels, 3).value == pytest.approx(1.6, abs=1e-6)


def test_monotone_on_corpus():
    for name in ("interval", "square", "triangle", "deterministic"):
        problem = inst(name)
        vals = [solve_adapt1(problem).value, solve_adapt2_enum(problem).value,
                solve_adapt3_enum(problem).value, solve_comp_adapt(problem).value]
        for hi, lo in zip(vals, vals[1:]):
            assert hi >= lo - 1e-6


@pytest.mark.parametrize("seed", range(8))
def test_segment_enumeration_matches_breakpoints(seed):
    problem = corpus.generate_random(seed, 1, 5)
    for k, solver in ((2, solve_adapt2_enum), (3, solve_adapt3_enum)):
        a, b = solver(problem), solve_adapt_1d(problem, k)
        assert a.status == b.status
        if a.feasible:
            assert a.value == pytest.approx(b.value, abs=1e-6)


def test_integer_recourse_stays_integral():
    base = inst("square")
    problem = Instance(base.c, base.d, base.A, base.B, base.b, base.omega,
                       y_bounds=[(-5, 5)], y_integer=(0,), name="square-int")
    reports = [solve_adapt2_enum(problem), solve_adapt2_milp(problem), solve_adapt3_enum(problem),
               solve_scenario_lb(problem, problem.omega.vertices, 2)]
    for rep in reports:
        assert rep.feasible
        for y in rep.solution.ys:
            assert np.all(np.abs(y - np.round(y)) <= 1e-6)
    assert reports[0].value == pytest.approx(2)


def test_recover_cover_examples():
    p = inst("P")
    (piece,) = recover_cover(p, Solution([2, 2, 0, 2], [[2]], 2.0))
    for w in np.linspace(0, 1, 11):
        assert piece.contains([w], tol=1e-9)
    (piece,) = recover_cover(p, Solution([0, 0, 0, 0], [[5]], 0.0))
    assert piece.contains([0.0])
    assert not piece.contains([0.01])


def test_square_pieces_cover_the_square():
    sq = inst("square")
    rep = solve_adapt2_enum(sq)
    pieces = rep.solution.pieces
    for w in np.random.default_rng(0).uniform(size=(200, 2)):
        assert any(pc.contains(w, tol=1e-7) for pc in pieces)


def test_reports_verify():
    for name in ("interval", "square", "triangle", "deterministic"):
        problem = inst(name)
        for rep in (solve_adapt1(problem), solve_adapt2_enum(problem), solve_adapt2_milp(problem),
                    solve_adapt3_enum(problem)):
            if rep.feasible:
                assert verify_cover(problem, rep.solution).covered


def test_skeleton_points_lie_in_their_pieces():
    # every point a piece must contain satisfies that piece's recovered inequalities
    from finadapt.covers import build_vbar

    for seed in (1, 9, 13):
        problem = corpus.generate_random(seed, 2, 4)
        rep = solve_adapt3_enum(problem)
        if not rep.feasible:
            continue
        pieces = recover_cover(problem, rep.solution)
        for i in range(3):
            for q in build_vbar(rep.skeleton, i):
                assert pieces[i].contains(q, tol=1e-6)
                assert contains_point(problem.omega, q)


def test_report_value_convention():
    assert solvers.SolveReport(Status.INFEASIBLE).value == math.inf
    assert solvers.SolveReport(Status.UNBOUNDED).value == -math.inf
