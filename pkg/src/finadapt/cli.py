"""Command-line frontend: solve, verify, bound, render and export instances.

Exit codes: 0 optimal or covered, 1 solver failure, 2 infeasible or not
covered, 3 unbounded, 4 input error, 5 method does not apply to the instance.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import corpus, io, solvers
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    FinAdaptError,
    InstanceFormatError,
    NotOneDimensional,
    NotTwoDimensional,
    RequiresDeterministicAB,
    ScenarioOutsideOmega,
    TooLarge,
    UnknownInstance,
)
from .lp import Status
from .model import Method
from .render import render_svg
from .verify import check_solution, verify_cover

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INFEASIBLE = 2
EXIT_UNBOUNDED = 3
EXIT_INPUT = 4
EXIT_MISMATCH = 5

_STATUS_EXIT = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE,
                Status.UNBOUNDED: EXIT_UNBOUNDED}

log = logging.getLogger("finadapt")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def load_instance_arg(arg: str):
    """A path to an instance file, or the name of a built-in instance."""
    path = Path(arg)
    if path.exists():
        return io.load_instance(path)
    if arg in corpus.names():
        return corpus.get_instance(arg).instance
    raise InstanceFormatError(f"{arg}: no such file or built-in instance")


def _write(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _run_solver(inst, args):
    k, method = args.k, args.method
    if method == "comp":
        return solvers.solve_comp_adapt(inst)
    if method == "1d":
        return solvers.solve_adapt_1d(inst, k)
    if method == "milp":
        if k != 2:
            raise _UsageError("--method milp requires --k 2")
        return solvers.solve_adapt2_milp(inst, big_m=args.big_m)
    symmetry = not args.no_symmetry_pruning
    if k == 1:
        return solvers.solve_adapt1(inst)
    if k == 2:
        return solvers.solve_adapt2_enum(inst, symmetry=symmetry, threads=args.threads)
    return solvers.solve_adapt3_enum(inst, symmetry=symmetry, threads=args.threads)


def cmd_solve(args) -> int:
    if args.big_m is not None and args.method != "milp":
        raise _UsageError("--big-m only applies to --method milp")
    if args.threads < 1:
        raise _UsageError("--threads must be at least 1")
    inst = load_instance_arg(args.instance)
    report = _run_solver(inst, args)
    doc = {
        "status": report.status.value,
        "candidates_explored": report.candidates_explored,
        "lp_solves": report.lp_solves,
    }
    if report.feasible:
        sol = report.solution
        cert = None if sol.method is Method.COMP else verify_cover(inst, sol)
        doc.update(io.solution_to_json(sol, cert))
        if report.winning_candidate is not None:
            doc["winning_candidate"] = report.winning_candidate
        print(f"objective: {sol.objective:.10g}")
    else:
        doc.update({"method": args.method, "k": args.k, "objective": None})
        print(report.status.value.upper())
    _write(doc, args.out)
    return _STATUS_EXIT[report.status]


def cmd_verify(args) -> int:
    inst = load_instance_arg(args.instance)
    sol = io.load_solution(args.solution)
    if sol.x.size != inst.dim_x or any(y.size != inst.dim_y for y in sol.ys):
        raise InstanceFormatError("solution dimensions do not match the instance")
    cert = verify_cover(inst, sol, tol=args.tol)
    if not cert.covered:
        print("NOT COVERED")
        print(f"witness: {cert.witness.tolist()}")
        for i, rows in enumerate(cert.violated_rows):
            print(f"  piece {i + 1} violates rows {rows}")
        print(f"slack: {cert.max_uncovered_slack:.6g}")
        return EXIT_INFEASIBLE
    if not check_solution(inst, sol, sol.objective, tol=args.tol):
        print("COVERED, but bounds, integrality or the stated objective do not hold")
        return EXIT_INFEASIBLE
    print("COVERED")
    print(f"objective: {sol.objective:.10g}")
    return EXIT_OK


def _parse_point(value) -> list[float]:
    if isinstance(value, list):
        return [float(Fraction(v)) if isinstance(v, str) else float(v) for v in value]
    return [float(Fraction(value)) if isinstance(value, str) else float(value)]


def read_scenarios(path) -> list[list[float]]:
    """JSON list of points; scalars are 1-D points and strings like "1/3" are fractions."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, list) or not doc:
            raise ValueError("expected a non-empty list of points")
        return [_parse_point(v) for v in doc]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None


def grid_scenarios(inst, n: int) -> np.ndarray:
    """``n`` equally spaced points on every edge of omega (endpoints included)."""
    omega = inst.omega
    pts = [omega.edge_point(e, a) for e in range(len(omega.edges)) for a in np.linspace(0, 1, n)]
    pts.extend(omega.vertices)
    out = []
    for p in pts:
        if not any(np.max(np.abs(p - q)) <= 1e-12 for q in out):
            out.append(p)
    return np.array(out)


def cmd_lowerbound(args) -> int:
    inst = load_instance_arg(args.instance)
    if args.k < 1:
        raise _UsageError("--k must be positive")
    if args.grid is not None:
        if args.grid < 2:
            raise _UsageError("--grid needs at least 2 points per edge")
        pts = grid_scenarios(inst, args.grid)
    else:
        pts = read_scenarios(args.scenarios)
    report = solvers.solve_scenario_lb(inst, pts, args.k)
    if report.feasible:
        print(f"lower bound: {report.value:.10g}")
    else:
        print(report.status.value.upper())
    return _STATUS_EXIT[report.status]


def cmd_render(args) -> int:
    inst = load_instance_arg(args.instance)
    sol = io.load_solution(args.solution)
    Path(args.out).write_text(render_svg(inst, sol), encoding="utf-8")
    return EXIT_OK


def cmd_export(args) -> int:
    entry = corpus.get_instance(args.name)
    _write(io.instance_to_json(entry.instance), args.out)
    for i, (sol, _) in enumerate(entry.reference_solutions):
        if args.reference_out:
            target = args.reference_out if len(entry.reference_solutions) == 1 else f"{args.reference_out}.{i}"
            _write(io.solution_to_json(sol), target)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finadapt", description="Finite adaptability for two-stage robust linear programs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve with k second-stage values")
    p.add_argument("--k", type=int, choices=(1, 2, 3), default=2)
    p.add_argument("--method", choices=("enum", "milp", "1d", "comp"), default="enum")
    p.add_argument("--instance", required=True, help="instance file or built-in name")
    p.add_argument("--out", default=None, help="solution file (stdout if omitted)")
    p.add_argument("--no-symmetry-pruning", action="store_true")
    p.add_argument("--big-m", type=float, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check that a solution's pieces cover omega")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lowerbound", help="finite-scenario lower bound")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--grid", type=int, help="points per edge of omega")
    group.add_argument("--scenarios", help="JSON list of scenario points")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("render", help="draw the pieces of a solution as SVG")
    p.add_argument("--instance", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("export", help="write a built-in instance as JSON")
    p.add_argument("name", choices=corpus.names())
    p.add_argument("--out", default=None)
    p.add_argument("--reference-out", default=None, help="also write its reference solution")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"finadapt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"finadapt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RequiresDeterministicAB, NotOneDimensional, NotTwoDimensional) as exc:
        print(f"finadapt: method does not apply: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (InstanceFormatError, UnknownInstance, ScenarioOutsideOmega, DimensionMismatch,
            TooLarge, DegenerateInput, OSError) as exc:
        print(f"finadapt: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FinAdaptError as exc:
        print(f"finadapt: solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
