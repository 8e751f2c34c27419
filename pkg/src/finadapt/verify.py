"""Independent feasibility oracle for k-adaptable solutions.

A point ``w`` of the uncertainty set is left uncovered exactly when, for each
piece ``i``, some row ``r_i`` is violated by ``(x, y_i)`` at ``w``.  For a
fixed choice of rows ``(r_1, ..., r_k)`` the largest common violation
``max_w min_i residual_{r_i}(w)`` is a linear program over the vertex
weights of omega, so enumerating row choices decides coverage exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import DEFAULT_TOL
from .errors import CombinatorialBudgetExceeded
from .lp import GE, ProgramBuilder, solve_lp
from .model import Instance, Solution, objective_value, residual_map

ROW_COMBINATION_CAP = 10**6


class Verdict(str, Enum):
    COVERED = "covered"
    NOT_COVERED = "not_covered"


@dataclass
class CoverCertificate:
    verdict: Verdict
    witness: np.ndarray | None = None
    violated_rows: list = field(default_factory=list)
    max_uncovered_slack: float = -math.inf
    lp_solves: int = 0

    @property
    def covered(self) -> bool:
        return self.verdict is Verdict.COVERED

    def to_json(self) -> dict:
        out = {"verdict": self.verdict.value, "max_uncovered_slack": self.max_uncovered_slack}
        if self.witness is not None:
            out["witness"] = self.witness.tolist()
            out["violated_rows"] = self.violated_rows
        return out


def _violations(maps, w, tol):
    return [np.flatnonzero(r0 + G @ w > tol).tolist() for r0, G in maps]


def verify_cover(inst: Instance, sol: Solution, tol: float = DEFAULT_TOL.verify,
                 budget: int = ROW_COMBINATION_CAP) -> CoverCertificate:
    """Decide whether the pieces induced by ``sol`` cover the uncertainty set.

    Returns ``NotCovered`` with a witness point as soon as some row choice
    leaves a point violated by more than ``tol`` in every piece; otherwise
    every row choice is examined before answering ``Covered``.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    m, k = inst.num_rows, sol.k
    if m ** k > budget:
        raise CombinatorialBudgetExceeded(f"{m}^{k} row combinations exceed the cap of {budget}")
    maps = [residual_map(inst, sol.x, y) for y in sol.ys]
    V = inst.omega.vertices
    if m == 0:
        return CoverCertificate(Verdict.COVERED, max_uncovered_slack=-math.inf)

    # per piece: rows that exceed tol somewhere on omega (affine => at a vertex)
    at_vertices = [r0[None, :] + V @ G.T for r0, G in maps]          # (nv, m)
    candidate_rows = [np.flatnonzero(res.max(axis=0) > tol).tolist() for res in at_vertices]
    # vertex scan: min over pieces of the worst residual at each vertex
    vertex_slack = np.min([res.max(axis=1) for res in at_vertices], axis=0)
    best_slack = float(vertex_slack.max())
    if best_slack > tol:
        v = int(np.argmax(vertex_slack))
        w = V[v].copy()
        return CoverCertificate(Verdict.NOT_COVERED, w, _violations(maps, w, tol), best_slack)
    if any(not rows for rows in candidate_rows):
        return CoverCertificate(Verdict.COVERED, max_uncovered_slack=best_slack)

    lp_solves = 0
    for combo in itertools.product(*candidate_rows):
        pb = ProgramBuilder()
        lam = pb.add_vars(V.shape[0], lower=0.0)
        t = pb.add_vars(1, cost=1.0)
        pb.add_row([(lam, 1.0)], "=", 1.0)
        for (r0, G), r in zip(maps, combo):
            # r0 + G_r . (V^T lam) >= t, with sum(lam) = 1
            pb.add_row([(lam, r0[r] + V @ G[r]), (t, -1.0)], GE, 0.0)
        lp, _ = pb.build(maximize=True)
        res = solve_lp(lp)
        lp_solves += 1
        if not res.optimal:
            continue
        if res.objective > best_slack:
            best_slack = res.objective
        if res.objective > tol:
            lam_v = np.clip(res.x[lam], 0.0, None)
            w = lam_v @ V / lam_v.sum()
            return CoverCertificate(Verdict.NOT_COVERED, w, _violations(maps, w, tol),
                                    float(res.objective), lp_solves)
    return CoverCertificate(Verdict.COVERED, None, [], best_slack, lp_solves)


def _within_bounds(v: np.ndarray, bounds: np.ndarray, tol: float) -> bool:
    return bool(np.all(v >= bounds[:, 0] - tol) and np.all(v <= bounds[:, 1] + tol))


def _integral(v: np.ndarray, idx, tol: float) -> bool:
    idx = list(idx)
    return not idx or bool(np.all(np.abs(v[idx] - np.round(v[idx])) <= tol))


def check_solution(inst: Instance, sol: Solution, claimed_objective: float,
                   tol: float = DEFAULT_TOL.verify) -> bool:
    """Cover certificate plus objective arithmetic, bounds and integrality."""
    itol = DEFAULT_TOL.integrality
    if not _within_bounds(sol.x, inst.x_bounds, tol) or not _integral(sol.x, inst.x_integer, itol):
        return False
    for y in sol.ys:
        if not _within_bounds(y, inst.y_bounds, tol) or not _integral(y, inst.y_integer, itol):
            return False
    if abs(objective_value(inst, sol) - claimed_objective) > tol:
        return False
    return verify_cover(inst, sol, tol).covered
