"""Exact programs for finite adaptability with deterministic A and B.

All second-stage points that move along an edge (``t_e``, ``u_e``, ``v_e``)
or inside a 2-face (``t_f``) are parameterized barycentrically, so ``b`` at
those points stays affine in the decision variables and every candidate is a
plain linear program (mixed-integer if the instance has integer variables).
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL
from .covers import (
    SkeletonCover,
    VertexCover,
    compute_F_by_intervals,
    edge_label_options,
    enumerate_vertex_covers,
    forced_labeling,
    members,
    popcount,
)
from .errors import (
    BigMTooSmall,
    BigMTooSmallWarning,
    NotOneDimensional,
    RequiresDeterministicAB,
    ScenarioOutsideOmega,
)
from .geometry import distance_to_polytope
from .lp import GE, LE, LpSolution, ProgramBuilder, Status, solve_milp
from .model import Instance, Method, Solution, objective_value, residual_map

log = logging.getLogger(__name__)

_IMPROVE = 1e-9
BIG_M_DOUBLINGS = 8


@dataclass
class SolveReport:
    status: Status
    solution: Solution | None = None
    candidates_explored: int = 0
    lp_solves: int = 0
    wall_time: float = 0.0
    winning_candidate: dict | None = None
    skeleton: SkeletonCover | None = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status is Status.OPTIMAL

    @property
    def value(self) -> float:
        """Optimal value, ``+inf`` when infeasible and ``-inf`` when unbounded."""
        if self.status is Status.OPTIMAL:
            return self.solution.objective
        return math.inf if self.status is Status.INFEASIBLE else -math.inf


@dataclass(frozen=True)
class PieceDescription:
    """``{w in omega : normals @ w <= offsets}`` for one second-stage value."""

    normals: np.ndarray
    offsets: np.ndarray

    def violation(self, w) -> np.ndarray:
        return self.normals @ np.asarray(w, float) - self.offsets

    def contains(self, w, tol: float = 1e-9) -> bool:
        return bool(np.all(self.violation(w) <= tol))

    def to_json(self) -> dict:
        return {"normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


def recover_cover(inst: Instance, sol: Solution) -> list[PieceDescription]:
    """Pieces ``{w : A(w) x + B(w) y_i <= b(w)}`` induced by a solution.

    For fixed ``x`` and ``y_i`` the residuals are affine in ``w``, so each piece
    is a polyhedron cut out of the uncertainty set.
    """
    out = []
    for y in sol.ys:
        r0, G = residual_map(inst, sol.x, y)
        out.append(PieceDescription(G, -r0))
    return out


# --------------------------------------------------------------------------
# shared program scaffolding


class _Context:
    """Instance data shared by every candidate program."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.A = inst.A.const
        self.B = inst.B.const
        self.bV = inst.b_at_vertices()
        self.verts = inst.omega.vertices
        self.edges = inst.omega.edges
        self.lp_solves = 0

    def base(self, k: int):
        inst = self.inst
        pb = ProgramBuilder()
        x = pb.add_vars(inst.dim_x, inst.x_bounds[:, 0], inst.x_bounds[:, 1], inst.c,
                        integer=inst.x_integer or False)
        ys = [pb.add_vars(inst.dim_y, inst.y_bounds[:, 0], inst.y_bounds[:, 1],
                          integer=inst.y_integer or False) for _ in range(k)]
        z = pb.add_vars(1, cost=1.0)
        for y in ys:
            pb.add_row([(y, inst.d), (z, -1.0)], LE, 0.0)
        return pb, x, ys, z

    def at_point(self, pb, x, y, rhs, extra=()):
        """Rows ``A x + B y + extra <= rhs``; ``extra`` are ``(idx, (m, len))`` blocks."""
        pb.add_rows([(x, self.A), (y, self.B), *extra], LE, rhs)

    def at_vertex(self, pb, x, y, v):
        self.at_point(pb, x, y, self.bV[v])

    def at_edge(self, pb, x, y, e, alpha):
        """Rows at the point ``tail + alpha (head - tail)`` of edge ``e``."""
        edge = self.edges[e]
        db = self.bV[edge.head] - self.bV[edge.tail]
        self.at_point(pb, x, y, self.bV[edge.tail], [(alpha, -db[:, None])])

    def solve(self, pb) -> LpSolution:
        lp, spec = pb.build()
        self.lp_solves += 1
        return solve_milp(lp, spec)

    def solution(self, res: LpSolution, x, ys, method: Method, **info) -> Solution:
        sol = Solution(res.x[x], [res.x[y] for y in ys], 0.0, method, info=info)
        sol.objective = objective_value(self.inst, sol)
        sol.pieces = recover_cover(self.inst, sol)
        return sol


def _require_deterministic(inst: Instance) -> None:
    if not inst.is_deterministic_AB():
        raise RequiresDeterministicAB(
            f"instance {inst.name!r} has uncertain A or B; use the scenario bound or the oracle"
        )


def _better(value: float, best: float) -> bool:
    if not math.isfinite(best):
        return True
    return value < best - _IMPROVE * max(1.0, abs(best))


def _report(status, ctx, t0, solution=None, **kw) -> SolveReport:
    return SolveReport(status, solution, lp_solves=ctx.lp_solves,
                       wall_time=time.perf_counter() - t0, **kw)


# --------------------------------------------------------------------------
# k = 1 and complete adaptability


def solve_adapt1(inst: Instance) -> SolveReport:
    """One second-stage value feasible at every vertex (hence on all of omega)."""
    _require_deterministic(inst)
    t0 = time.perf_counter()
    ctx = _Context(inst)
    pb, x, (y,), _ = ctx.base(1)
    for v in range(len(ctx.verts)):
        ctx.at_vertex(pb, x, y, v)
    res = ctx.solve(pb)
    if not res.optimal:
        return _report(res.status, ctx, t0, candidates_explored=1)
    return _report(Status.OPTIMAL, ctx, t0, ctx.solution(res, x, [y], Method.ADAPT1),
                   candidates_explored=1)


def solve_comp_adapt(inst: Instance) -> SolveReport:
    """Complete adaptability: one recourse vector per vertex.

    The returned ``ys`` are the vertex recourses (in vertex order); the policy
    on the interior is their convex interpolation, so the solution is not a
    finite-adaptability certificate.
    """
    _require_deterministic(inst)
    t0 = time.perf_counter()
    ctx = _Context(inst)
    nv = len(ctx.verts)
    pb, x, ys, _ = ctx.base(nv)
    for v in range(nv):
        ctx.at_vertex(pb, x, ys[v], v)
    res = ctx.solve(pb)
    if not res.optimal:
        return _report(res.status, ctx, t0, candidates_explored=1)
    sol = Solution(res.x[x], [res.x[y] for y in ys], 0.0, Method.COMP,
                   info={"vertices": ctx.verts.tolist()})
    sol.objective = objective_value(inst, sol)
    return _report(Status.OPTIMAL, ctx, t0, sol, candidates_explored=1)


# --------------------------------------------------------------------------
# one-dimensional uncertainty


def solve_adapt_1d(inst: Instance, k: int) -> SolveReport:
    """Single program over ordered breakpoints of a segment."""
    _require_deterministic(inst)
    if k < 1:
        raise ValueError("k must be positive")
    omega = inst.omega
    if omega.affine_dimension != 1:
        raise NotOneDimensional(f"uncertainty set has affine dimension {omega.affine_dimension}")
    t0 = time.perf_counter()
    ctx = _Context(inst)
    (edge,) = omega.edges
    b0, b1 = ctx.bV[edge.tail], ctx.bV[edge.head]
    db = (b1 - b0)[:, None]
    pb, x, ys, _ = ctx.base(k)
    s = pb.add_vars(k - 1, lower=0.0, upper=1.0)
    for i in range(1, k - 1):
        pb.add_row([(s[[i - 1, i]], [1.0, -1.0])], LE, 0.0)
    for i, y in enumerate(ys):
        # left end of piece i
        if i == 0:
            ctx.at_point(pb, x, y, b0)
        else:
            ctx.at_point(pb, x, y, b0, [(s[i - 1], -db)])
        # right end of piece i
        if i == k - 1:
            ctx.at_point(pb, x, y, b1)
        else:
            ctx.at_point(pb, x, y, b0, [(s[i], -db)])
    res = ctx.solve(pb)
    if not res.optimal:
        return _report(res.status, ctx, t0, candidates_explored=1)
    params = res.x[s].tolist()
    tail, head = ctx.verts[edge.tail], ctx.verts[edge.head]
    points = [((1 - a) * tail + a * head).tolist() for a in params]
    sol = ctx.solution(res, x, ys, Method.ONE_D, breakpoints=params, breakpoint_points=points)
    return _report(Status.OPTIMAL, ctx, t0, sol, candidates_explored=1,
                   winning_candidate={"breakpoints": params, "breakpoint_points": points})


# --------------------------------------------------------------------------
# skeleton-cover candidate programs (k = 2, 3)


def _candidate_program(ctx: _Context, vc: VertexCover, labels, faces=(), decided=None):
    """Program for one skeleton-cover candidate.

    ``labels`` gives one label mask per edge; edges whose index is not in
    ``decided`` (when given) contribute no rows, which yields a relaxation.
    Returns the builder plus handles needed to read the placements back.
    """
    k = vc.k
    pb, x, ys, z = ctx.base(k)
    memb = vc.membership
    for v, m in enumerate(memb):
        for i in members(m):
            ctx.at_vertex(pb, x, ys[i], v)
    handles = {"t": {}, "u": {}, "v": {}, "f": []}
    for e, lab in enumerate(labels):
        if decided is not None and e not in decided:
            continue
        n = popcount(lab)
        if n == 2:
            a = pb.add_vars(1, lower=0.0, upper=1.0)
            handles["t"][e] = a
            for i in members(lab):
                ctx.at_edge(pb, x, ys[i], e, a)
        elif n == 3:
            edge = ctx.edges[e]
            au = pb.add_vars(1, lower=0.0, upper=1.0)
            av = pb.add_vars(1, lower=0.0, upper=1.0)
            pb.add_row([(au, 1.0), (av, -1.0)], LE, 0.0)
            handles["u"][e], handles["v"][e] = au, av
            mt, mh = memb[edge.tail], memb[edge.head]
            for i in range(k):
                tail_in, head_in = mt >> i & 1, mh >> i & 1
                if not tail_in and not head_in:
                    ctx.at_edge(pb, x, ys[i], e, au)
                    ctx.at_edge(pb, x, ys[i], e, av)
                else:
                    if tail_in:
                        ctx.at_edge(pb, x, ys[i], e, au)
                    if head_in:
                        ctx.at_edge(pb, x, ys[i], e, av)
    for f in faces:
        verts = sorted(f.vertex_indices)
        mu = pb.add_vars(len(verts), lower=0.0)
        pb.add_row([(mu, 1.0)], "=", 1.0)
        handles["f"].append((f, verts, mu))
        for i in range(k):
            ctx.at_point(pb, x, ys[i], np.zeros(ctx.inst.num_rows), [(mu, -ctx.bV[verts].T)])
    return pb, x, ys, handles


def _skeleton_from(ctx, vc, labels, handles, res) -> SkeletonCover:
    at = {e: float(res.x[a][0]) for e, a in handles["t"].items()}
    au = {e: float(res.x[a][0]) for e, a in handles["u"].items()}
    av = {e: max(float(res.x[a][0]), au[e]) for e, a in handles["v"].items()}
    at = {e: min(max(a, 0.0), 1.0) for e, a in at.items()}
    return SkeletonCover(ctx.inst.omega, vc, tuple(labels), at, au, av)


def _face_points(ctx, handles, res) -> list:
    out = []
    for f, verts, mu in handles["f"]:
        w = np.clip(res.x[mu], 0.0, None)
        w = w / w.sum()
        out.append((w @ ctx.verts[verts]).tolist())
    return out


@dataclass
class _Best:
    value: float = math.inf
    order: int = -1
    status: Status = Status.INFEASIBLE
    solution: Solution | None = None
    skeleton: SkeletonCover | None = None
    face_points: list | None = None
    candidates: int = 0
    lp_solves: int = 0


def _enum2_chunk(inst: Instance, covers: list[tuple[int, tuple]]) -> _Best:
    ctx = _Context(inst)
    best = _Best()
    for order, memb in covers:
        vc = VertexCover(2, memb)
        labels = forced_labeling(inst.omega, vc)
        pb, x, ys, handles = _candidate_program(ctx, vc, labels)
        res = ctx.solve(pb)
        best.candidates += 1
        if res.status is Status.UNBOUNDED:
            best.status, best.value, best.order = Status.UNBOUNDED, -math.inf, order
            break
        if res.optimal and _better(res.objective, best.value):
            best.value, best.order, best.status = res.objective, order, Status.OPTIMAL
            best.solution = ctx.solution(res, x, ys, Method.ENUM2)
            best.skeleton = _skeleton_from(ctx, vc, labels, handles, res)
    best.lp_solves = ctx.lp_solves
    return best


def _enum3_chunk(inst: Instance, covers: list[tuple[int, tuple]], prune: bool = True) -> _Best:
    """Branch and bound over edge labels for each vertex cover.

    Edges whose endpoints share a piece take that piece as a singleton label:
    it adds no point to any piece, so every other valid label only tightens
    the program.  The remaining edges branch over their valid labels; partial
    programs (vertex rows plus decided edges, no face rows) bound each subtree.
    """
    ctx = _Context(inst)
    omega = inst.omega
    best = _Best()

    def bound_ok(res: LpSolution) -> bool:
        if res.status is Status.INFEASIBLE:
            return False
        if res.status is Status.UNBOUNDED or not prune:
            return True
        return _better(res.objective, best.value)

    for order, memb in covers:
        vc = VertexCover(3, memb)
        fixed = []
        branching = []
        for e, edge in enumerate(omega.edges):
            mt, mh = memb[edge.tail], memb[edge.head]
            shared = mt & mh
            if shared:
                fixed.append(1 << members(shared)[0])
            else:
                fixed.append(None)
                branching.append((e, [m for m in edge_label_options(mt, mh, 3) if popcount(m) > 1]))

        if branching:
            pb, *_ = _candidate_program(ctx, vc, [0] * len(omega.edges), decided=set())
            if not bound_ok(ctx.solve(pb)):
                continue

        labels = list(fixed)
        stop = False

        def dfs(depth: int):
            nonlocal stop
            if stop:
                return
            if depth == len(branching):
                faces = compute_F_by_intervals(omega, vc, labels)
                pb, x, ys, handles = _candidate_program(ctx, vc, labels, faces)
                res = ctx.solve(pb)
                best.candidates += 1
                if res.status is Status.UNBOUNDED:
                    best.status, best.value, best.order = Status.UNBOUNDED, -math.inf, order
                    stop = True
                elif res.optimal and _better(res.objective, best.value):
                    best.value, best.order, best.status = res.objective, order, Status.OPTIMAL
                    best.solution = ctx.solution(res, x, ys, Method.ENUM3)
                    best.skeleton = _skeleton_from(ctx, vc, labels, handles, res)
                    best.face_points = _face_points(ctx, handles, res)
                return
            e, options = branching[depth]
            decided = {b[0] for b in branching[:depth + 1]}
            for lab in options:
                labels[e] = lab
                if depth + 1 < len(branching):
                    pb, *_ = _candidate_program(ctx, vc, labels, decided=decided)
                    if not bound_ok(ctx.solve(pb)):
                        continue
                dfs(depth + 1)
                if stop:
                    return
            labels[e] = None

        dfs(0)
        if stop:
            break
    best.lp_solves = ctx.lp_solves
    return best


def _run_enumeration(worker, inst: Instance, k: int, symmetry: bool, threads: int) -> _Best:
    covers = [(n, vc.membership) for n, vc in
              enumerate(enumerate_vertex_covers(inst.omega, k, symmetry))]
    if threads <= 1 or len(covers) < 2 * threads:
        return worker(inst, covers)
    chunks = [covers[i::threads] for i in range(threads)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(worker, [inst] * threads, chunks))
    # deterministic reduction: lowest value, then earliest candidate
    merged = _Best()
    for part in parts:
        merged.candidates += part.candidates
        merged.lp_solves += part.lp_solves
    unbounded = [p for p in parts if p.status is Status.UNBOUNDED]
    feasible = [p for p in parts if p.status is Status.OPTIMAL]
    if unbounded:
        win = min(unbounded, key=lambda p: p.order)
    elif feasible:
        low = min(p.value for p in feasible)
        tied = [p for p in feasible if not _better(low, p.value)]
        win = min(tied, key=lambda p: p.order)
    else:
        return merged
    for name in ("value", "order", "status", "solution", "skeleton", "face_points"):
        setattr(merged, name, getattr(win, name))
    return merged


def _enum_report(best: _Best, t0: float) -> SolveReport:
    winner = None
    if best.skeleton is not None and best.status is Status.OPTIMAL:
        winner = best.skeleton.describe()
        if best.face_points:
            winner["face_points"] = best.face_points
        best.solution.info["cover"] = winner
    return SolveReport(best.status, best.solution if best.status is Status.OPTIMAL else None,
                       candidates_explored=best.candidates, lp_solves=best.lp_solves,
                       wall_time=time.perf_counter() - t0, winning_candidate=winner,
                       skeleton=best.skeleton if best.status is Status.OPTIMAL else None)


def solve_adapt2_enum(inst: Instance, symmetry: bool = True, threads: int = 1) -> SolveReport:
    """Minimum over all two-piece vertex covers of the cover's program."""
    _require_deterministic(inst)
    t0 = time.perf_counter()
    return _enum_report(_run_enumeration(_enum2_chunk, inst, 2, symmetry, threads), t0)


def solve_adapt3_enum(inst: Instance, symmetry: bool = True, threads: int = 1) -> SolveReport:
    """Minimum over three-piece vertex covers and valid edge labelings."""
    _require_deterministic(inst)
    t0 = time.perf_counter()
    return _enum_report(_run_enumeration(_enum3_chunk, inst, 3, symmetry, threads), t0)


# --------------------------------------------------------------------------
# big-M formulations


def default_big_m(inst: Instance) -> float:
    """Twice the largest ``|b(w)|`` over omega, attained at a vertex."""
    bV = inst.b_at_vertices()
    return 2.0 * float(np.abs(bV).max()) if bV.size else 0.0


def solve_adapt2_milp(inst: Instance, big_m: float | None = None) -> SolveReport:
    """Single mixed-integer program for two pieces.

    Binaries ``a[i, w]`` put vertex ``w`` in piece ``i``; ``b[e]`` switches on
    the shared edge point of an edge whose endpoints end up in different
    pieces.  The result is certified by the cover oracle and re-solved with a
    doubled constant if the certificate fails.
    """
    from .verify import verify_cover

    _require_deterministic(inst)
    t0 = time.perf_counter()
    M = default_big_m(inst) if big_m is None else float(big_m)
    lp_total = 0
    for attempt in range(BIG_M_DOUBLINGS + 1):
        ctx = _Context(inst)
        res, sol, cover = _milp2_once(ctx, M)
        lp_total += ctx.lp_solves
        if not res.optimal:
            return SolveReport(res.status, None, candidates_explored=1, lp_solves=lp_total,
                               wall_time=time.perf_counter() - t0)
        cert = verify_cover(inst, sol)
        if cert.covered:
            sol.info.update(cover=cover, big_m=M)
            return SolveReport(Status.OPTIMAL, sol, candidates_explored=1, lp_solves=lp_total,
                               wall_time=time.perf_counter() - t0, winning_candidate=cover)
        warnings.warn(f"big-M {M:g} failed certification on {inst.name!r}; retrying with {2 * M:g}",
                      BigMTooSmallWarning, stacklevel=2)
        M = 2 * M if M > 0 else 1.0
    raise BigMTooSmall(f"no certified solution after {BIG_M_DOUBLINGS} doublings of big-M")


def _milp2_once(ctx: _Context, M: float):
    inst = ctx.inst
    nv, ne = len(ctx.verts), len(ctx.edges)
    pb, x, ys, _ = ctx.base(2)
    a = [pb.add_vars(nv, 0.0, 1.0, integer=True) for _ in range(2)]
    be = pb.add_vars(ne, 0.0, 1.0, integer=True)
    alpha = pb.add_vars(ne, 0.0, 1.0)
    Mvec = np.full((inst.num_rows, 1), M)
    for i in range(2):
        for v in range(nv):
            # A x + B y_i <= b(v) a + M (1 - a)
            ctx.at_point(pb, x, ys[i], np.full(inst.num_rows, M),
                         [(a[i][v], (M - ctx.bV[v])[:, None])])
        for e, edge in enumerate(ctx.edges):
            db = ctx.bV[edge.head] - ctx.bV[edge.tail]
            ctx.at_point(pb, x, ys[i], ctx.bV[edge.tail] + M,
                         [(alpha[e], -db[:, None]), (be[e], Mvec)])
    for v in range(nv):
        pb.add_row([(a[0][v], 1.0), (a[1][v], 1.0)], GE, 1.0)
    for e, edge in enumerate(ctx.edges):
        t, h = edge.tail, edge.head
        pb.add_row([(a[0][t], 1.0), (a[1][h], 1.0), (a[1][t], -1.0), (a[0][h], -1.0),
                    (be[e], -1.0)], LE, 1.0)
        pb.add_row([(a[1][t], 1.0), (a[0][h], 1.0), (a[0][t], -1.0), (a[1][h], -1.0),
                    (be[e], -1.0)], LE, 1.0)
    res = ctx.solve(pb)
    if not res.optimal:
        return res, None, None
    sol = ctx.solution(res, x, ys, Method.MILP2)
    av = [np.round(res.x[a[i]]).astype(int) for i in range(2)]
    cover = {
        "k": 2,
        "vertex_sets": [np.flatnonzero(av[i]).tolist() for i in range(2)],
        "active_edges": np.flatnonzero(np.round(res.x[be])).tolist(),
        "alpha_t": {str(e): float(res.x[alpha[e]]) for e in np.flatnonzero(np.round(res.x[be]))},
    }
    return res, sol, cover


def solve_scenario_lb(inst: Instance, scenarios, k: int, big_m: float | None = None,
                      tol: float = 1e-7) -> SolveReport:
    """Finite-scenario relaxation: each scenario must be served by some piece.

    Works for uncertain ``A`` and ``B`` since every scenario fixes ``w``.  The
    value is a lower bound on the k-adaptable optimum and infeasibility here
    certifies infeasibility there.  Rows whose variables are all bounded get
    an exact deactivation constant; the others use ``big_m`` (default twice
    the largest ``|b|`` over omega) and the model is re-solved with doubled
    constants until two consecutive solves agree.
    """
    if k < 1:
        raise ValueError("k must be positive")
    pts = [np.asarray(s, float).reshape(-1) for s in scenarios]
    if not pts:
        raise ValueError("at least one scenario is required")
    for s in pts:
        if s.size != inst.dim_omega or distance_to_polytope(inst.omega, s) > tol:
            raise ScenarioOutsideOmega(f"scenario {s.tolist()} is not in the uncertainty set")
    t0 = time.perf_counter()
    M = default_big_m(inst) if big_m is None else float(big_m)
    if M <= 0:
        M = 1.0
    ctx = _Context(inst)
    exact, uses_default = _scenario_constants(inst, pts)
    prev = None
    for attempt in range(BIG_M_DOUBLINGS + 1):
        res, sol = _scenario_once(ctx, pts, k, exact, M)
        if not uses_default:
            break
        key = (res.status, round(res.objective, 6) if res.optimal else None)
        if prev is not None and key == prev:
            break
        if prev is not None:
            warnings.warn(f"scenario bound changed when big-M grew to {M:g}; doubling again",
                          BigMTooSmallWarning, stacklevel=2)
        prev = key
        M *= 2
    if not res.optimal:
        return _report(res.status, ctx, t0, candidates_explored=1)
    return _report(Status.OPTIMAL, ctx, t0, sol, candidates_explored=1,
                   winning_candidate={"assignment": sol.info["assignment"]})


def _scenario_constants(inst: Instance, pts):
    """Exact per-(scenario, row) deactivation constants where bounds allow it.

    Entries are NaN where some participating variable is unbounded.
    """
    lo = np.concatenate([inst.x_bounds[:, 0], inst.y_bounds[:, 0]])
    hi = np.concatenate([inst.x_bounds[:, 1], inst.y_bounds[:, 1]])
    out = np.full((len(pts), inst.num_rows), np.nan)
    for s, w in enumerate(pts):
        coef = np.hstack([inst.A(w), inst.B(w)])
        b = inst.b(w)
        for r in range(inst.num_rows):
            nz = np.abs(coef[r]) > 0
            if not (np.isfinite(lo[nz]).all() and np.isfinite(hi[nz]).all()):
                continue
            top = np.sum(np.maximum(coef[r, nz] * lo[nz], coef[r, nz] * hi[nz]))
            out[s, r] = max(top - b[r], 0.0) + 1e-6 * (1.0 + abs(top) + abs(b[r]))
    return out, bool(np.isnan(out).any())


def _scenario_once(ctx: _Context, pts, k: int, exact: np.ndarray, M: float):
    inst = ctx.inst
    pb, x, ys, _ = ctx.base(k)
    z = [pb.add_vars(k, 0.0, 1.0, integer=True) for _ in pts]
    for s, w in enumerate(pts):
        Aw, Bw, bw = inst.A(w), inst.B(w), inst.b(w)
        Ms = np.where(np.isnan(exact[s]), M, exact[s])
        for i in range(k):
            pb.add_rows([(x, Aw), (ys[i], Bw), (z[s][i], Ms[:, None])], LE, bw + Ms)
        pb.add_row([(z[s], 1.0)], GE, 1.0)
    # pieces are interchangeable: the first scenario goes to the first piece
    pb.add_row([(z[0][:1], 1.0)], "=", 1.0)
    res = ctx.solve(pb)
    if not res.optimal:
        return res, None
    assignment = [np.flatnonzero(np.round(res.x[zs])).tolist() for zs in z]
    sol = ctx.solution(res, x, ys, Method.SCENARIO, assignment=assignment,
                       scenarios=[p.tolist() for p in pts])
    return res, sol
