"""Finite adaptability for two-stage robust linear programs."""

from .corpus import CorpusEntry, generate_random, get_instance
from .errors import FinAdaptError
from .geometry import Polytope, build_polytope, contains_point
from .lp import LinearProgram, LpSolution, Status, solve_lp, solve_milp
from .model import AffineMap, Instance, Method, Solution, evaluate_constraints
from .solvers import (
    SolveReport,
    recover_cover,
    solve_adapt1,
    solve_adapt2_enum,
    solve_adapt2_milp,
    solve_adapt3_enum,
    solve_adapt_1d,
    solve_comp_adapt,
    solve_scenario_lb,
)
from .verify import CoverCertificate, check_solution, verify_cover

__all__ = [
    "AffineMap", "CorpusEntry", "CoverCertificate", "FinAdaptError", "Instance", "LinearProgram",
    "LpSolution", "Method", "Polytope", "Solution", "SolveReport", "Status", "build_polytope",
    "check_solution", "contains_point", "evaluate_constraints", "generate_random", "get_instance",
    "recover_cover", "solve_adapt1", "solve_adapt2_enum", "solve_adapt2_milp", "solve_adapt3_enum",
    "solve_adapt_1d", "solve_comp_adapt", "solve_lp", "solve_milp", "solve_scenario_lb",
    "verify_cover",
]
