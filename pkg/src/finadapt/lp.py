"""Dense two-phase simplex with a small branch-and-bound layer.

Every program built elsewhere in the package is expressed as a
:class:`LinearProgram` and solved here.  The implementation favours
auditability over speed: a full tableau, Dantzig pricing, and Bland's rule
once a streak of degenerate pivots suggests cycling.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import IterationLimit, MalformedProgram, NodeLimit

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

# degenerate pivots tolerated before switching to Bland's rule
DEGENERATE_STREAK = 50


class Status(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """``min/max c.x  s.t.  A x (senses) b,  lower <= x <= upper``."""

    objective: np.ndarray
    matrix: np.ndarray
    senses: Sequence[str]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = False

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        self.matrix = np.asarray(self.matrix, dtype=float).reshape(-1, n)
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.senses = tuple(self.senses)
        self.lower = np.asarray(self.lower, dtype=float).reshape(-1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(-1)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    def validate(self) -> None:
        m, n = self.matrix.shape
        if self.rhs.size != m or len(self.senses) != m:
            raise MalformedProgram(
                f"{m} constraint rows but {self.rhs.size} right-hand sides "
                f"and {len(self.senses)} senses"
            )
        if self.lower.size != n or self.upper.size != n:
            raise MalformedProgram("bound vectors must match the number of variables")
        bad = [s for s in self.senses if s not in _SENSES]
        if bad:
            raise MalformedProgram(f"unknown constraint sense {bad[0]!r}")
        for name, arr in (("objective", self.objective), ("matrix", self.matrix),
                          ("rhs", self.rhs), ("lower", self.lower), ("upper", self.upper)):
            if np.isnan(arr).any():
                raise MalformedProgram(f"NaN entry in {name}")
        if np.isinf(self.matrix).any() or np.isinf(self.rhs).any() or np.isinf(self.objective).any():
            raise MalformedProgram("infinite coefficient in objective, matrix or rhs")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise MalformedProgram("lower bound +inf or upper bound -inf")

    def with_bounds(self, lower: np.ndarray, upper: np.ndarray) -> "LinearProgram":
        return LinearProgram(self.objective, self.matrix, self.senses, self.rhs,
                             lower, upper, self.maximize)


@dataclass(frozen=True)
class IntegralitySpec:
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(set(int(i) for i in self.indices))))

    def validate(self, lp: LinearProgram) -> None:
        for j in self.indices:
            if not 0 <= j < lp.num_vars:
                raise MalformedProgram(f"integer index {j} out of range")
            if not (math.isfinite(lp.lower[j]) and math.isfinite(lp.upper[j])):
                raise MalformedProgram(f"integer variable {j} needs finite bounds")


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    objective: float = math.nan
    duals: np.ndarray | None = None
    iterations: int = 0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def reduced_costs(lp: LinearProgram, duals: np.ndarray) -> np.ndarray:
    return lp.objective - lp.matrix.T @ duals


def dual_objective(lp: LinearProgram, sol: LpSolution, tol: float = 1e-9) -> float:
    """Lagrangian dual value implied by the row duals of ``sol``.

    Reduced costs are charged to whichever bound they push against; a reduced
    cost pointing at an infinite bound (dual infeasibility) yields ``-inf``
    for minimization, ``+inf`` for maximization.
    """
    y = sol.duals
    r = reduced_costs(lp, y)
    sign = -1.0 if lp.maximize else 1.0
    # work in minimization form
    r_min = sign * r
    total = sign * float(lp.rhs @ y)
    for j, rj in enumerate(r_min):
        if rj > tol:
            if not math.isfinite(lp.lower[j]):
                return -sign * math.inf
            total += rj * lp.lower[j]
        elif rj < -tol:
            if not math.isfinite(lp.upper[j]):
                return -sign * math.inf
            total += rj * lp.upper[j]
    return sign * total


# --------------------------------------------------------------------------
# standard form


@dataclass
class _StandardForm:
    A: np.ndarray              # equality rows, rhs >= 0
    b: np.ndarray
    c: np.ndarray
    D: np.ndarray              # x = shift + D @ x_std[:n_struct]
    shift: np.ndarray
    n_struct: int
    row_sign: np.ndarray       # +1/-1 flip applied to each row
    slack_basis: list = field(default_factory=list)  # per row, slack column or -1
    offset: float = 0.0


def _standardize(lp: LinearProgram) -> _StandardForm:
    m, n = lp.matrix.shape
    cols = []          # (orig index, sign)
    shift = np.zeros(n)
    bound_rows = []    # (std column, width)
    for j in range(n):
        lo, up = lp.lower[j], lp.upper[j]
        if math.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if math.isfinite(up):
                bound_rows.append((len(cols) - 1, up - lo))
        elif math.isfinite(up):
            shift[j] = up
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    n_struct = len(cols)
    D = np.zeros((n, n_struct))
    for k, (j, s) in enumerate(cols):
        D[j, k] = s

    c = lp.objective * (-1.0 if lp.maximize else 1.0)
    offset = float(c @ shift)
    A_struct = lp.matrix @ D
    rhs = lp.rhs - lp.matrix @ shift
    senses = list(lp.senses)
    if bound_rows:
        extra = np.zeros((len(bound_rows), n_struct))
        for r, (k, width) in enumerate(bound_rows):
            extra[r, k] = 1.0
        A_struct = np.vstack([A_struct, extra])
        rhs = np.concatenate([rhs, [w for _, w in bound_rows]])
        senses += [LE] * len(bound_rows)

    n_rows = A_struct.shape[0]
    n_slack = sum(1 for s in senses if s != EQ)
    A = np.zeros((n_rows, n_struct + n_slack))
    A[:, :n_struct] = A_struct
    slack_col = [-1] * n_rows
    k = n_struct
    for r, s in enumerate(senses):
        if s == LE:
            A[r, k] = 1.0
        elif s == GE:
            A[r, k] = -1.0
        else:
            continue
        slack_col[r] = k
        k += 1
    row_sign = np.where(rhs < 0, -1.0, 1.0)
    A *= row_sign[:, None]
    rhs = rhs * row_sign
    slack_basis = [
        sc if sc >= 0 and A[r, sc] > 0 else -1 for r, sc in enumerate(slack_col)
    ]
    c_std = np.zeros(A.shape[1])
    c_std[:n_struct] = D.T @ c
    return _StandardForm(A, rhs, c_std, D, shift, n_struct, row_sign, slack_basis, offset)


# --------------------------------------------------------------------------
# tableau machinery


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], tol: Tolerances, max_iter: int):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, r: int, c: int, obj: np.ndarray) -> None:
        T = self.T
        prow = T[r] / T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, prow)
        T[r] = prow
        obj -= obj[c] * prow
        self.basis[r] = c

    def run(self, obj: np.ndarray, n_allowed: int) -> Status:
        """Pivot until optimal or unbounded; ``obj`` holds reduced costs."""
        T = self.T
        streak = 0
        bland = False
        opt_tol = self.tol.optimality * 1e-2
        ptol = self.tol.pivot
        while True:
            rc = obj[:n_allowed]
            if bland:
                cand = np.flatnonzero(rc < -opt_tol)
                if cand.size == 0:
                    return Status.OPTIMAL
                c = int(cand[0])
            else:
                c = int(np.argmin(rc))
                if rc[c] >= -opt_tol:
                    return Status.OPTIMAL
            column = T[:, c]
            pos = np.flatnonzero(column > ptol)
            if pos.size == 0:
                return Status.UNBOUNDED
            ratios = T[pos, -1] / column[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if best <= 1e-12:
                streak += 1
                if streak > DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(r, c, obj)
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise IterationLimit(f"simplex exceeded {self.max_iter} pivots")


def solve_lp(lp: LinearProgram, tol: Tolerances = DEFAULT_TOL,
             max_iter: int | None = None) -> LpSolution:
    """Solve a linear program with the two-phase tableau simplex."""
    lp.validate()
    n = lp.num_vars
    if np.any(lp.lower > lp.upper + tol.feasibility):
        return LpSolution(Status.INFEASIBLE)
    # collapse tiny inverted ranges caused by rounding
    upper = np.maximum(lp.upper, lp.lower)
    if not np.array_equal(upper, lp.upper):
        lp = lp.with_bounds(lp.lower, upper)

    sf = _standardize(lp)
    m, N = sf.A.shape
    if max_iter is None:
        max_iter = 50 * (m + N) + 1000

    art_rows = [r for r in range(m) if sf.slack_basis[r] < 0]
    n_art = len(art_rows)
    T = np.zeros((m, N + n_art + 1))
    T[:, :N] = sf.A
    T[:, -1] = sf.b
    basis = list(sf.slack_basis)
    for k, r in enumerate(art_rows):
        T[r, N + k] = 1.0
        basis[r] = N + k
    tab = _Tableau(T, basis, tol, max_iter)

    scale = 1.0 + (float(np.abs(sf.b).max()) if m else 0.0)
    if n_art:
        obj1 = np.zeros(N + n_art + 1)
        obj1[N:N + n_art] = 1.0
        for r in art_rows:
            obj1 -= T[r]
        tab.run(obj1, N + n_art)
        if -obj1[-1] > tol.feasibility * scale:
            return LpSolution(Status.INFEASIBLE, iterations=tab.iterations)
        # drive remaining artificials out of the basis
        keep = []
        for r in range(m):
            if tab.basis[r] < N:
                keep.append(r)
                continue
            row = np.abs(tab.T[r, :N])
            c = int(np.argmax(row)) if N else -1
            if N and row[c] > tol.pivot:
                tab.pivot(r, c, obj1)
                keep.append(r)
        if len(keep) < m:
            tab.T = tab.T[keep]
            tab.basis = [tab.basis[r] for r in keep]
        kept_rows = keep
    else:
        kept_rows = list(range(m))

    obj2 = np.zeros(tab.T.shape[1])
    obj2[:N] = sf.c
    for r, bv in enumerate(tab.basis):
        if obj2[bv] != 0.0:
            obj2 -= obj2[bv] * tab.T[r]
    status = tab.run(obj2, N)
    if status is Status.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, iterations=tab.iterations)

    # recover primal/dual values from the final basis using the original data
    basis = tab.basis
    A_k = sf.A[kept_rows]
    B = A_k[:, basis]
    x_std = np.zeros(N)
    try:
        xb = np.linalg.solve(B, sf.b[kept_rows])
        y_k = np.linalg.solve(B.T, sf.c[basis])
    except np.linalg.LinAlgError:
        xb = tab.T[:, -1].copy()
        y_k = np.linalg.lstsq(B.T, sf.c[basis], rcond=None)[0]
    if np.max(np.abs(xb - tab.T[:, -1]), initial=0.0) > 1e-6 * scale:
        xb = tab.T[:, -1].copy()
    x_std[basis] = np.maximum(xb, 0.0)
    y_std = np.zeros(m)
    y_std[kept_rows] = y_k

    x = sf.shift + sf.D @ x_std[:sf.n_struct]
    m_orig = lp.num_rows
    duals = sf.row_sign[:m_orig] * y_std[:m_orig]
    if lp.maximize:
        duals = -duals
    objective = float(lp.objective @ x)
    return LpSolution(Status.OPTIMAL, x=x, objective=objective, duals=duals,
                      iterations=tab.iterations)


# --------------------------------------------------------------------------
# branch and bound


def solve_milp(lp: LinearProgram, spec: IntegralitySpec, tol: Tolerances = DEFAULT_TOL,
               node_limit: int = 200_000) -> LpSolution:
    """Branch and bound over bounded integer variables.

    Best-bound node selection, most-fractional branching, deeper nodes first
    among equal bounds.  With an empty ``spec`` this is exactly
    :func:`solve_lp`.
    """
    lp.validate()
    if not spec.indices:
        return solve_lp(lp, tol)
    spec.validate(lp)
    ints = np.array(spec.indices)
    sign = -1.0 if lp.maximize else 1.0

    lower = lp.lower.copy()
    upper = lp.upper.copy()
    lower[ints] = np.ceil(lower[ints] - tol.integrality)
    upper[ints] = np.floor(upper[ints] + tol.integrality)

    root = solve_lp(lp.with_bounds(lower, upper), tol)
    if not root.optimal:
        return root
    counter = 0
    heap = [(sign * root.objective, 0, counter, lower, upper, root)]
    best_val = math.inf
    best: LpSolution | None = None
    nodes = 0
    iterations = root.iterations
    while heap:
        bound, negdepth, _, lo, up, sol = heapq.heappop(heap)
        if bound >= best_val - _gap(best_val):
            continue
        vals = sol.x[ints]
        frac = np.abs(vals - np.round(vals))
        j_local = int(np.argmax(frac))
        if frac[j_local] <= tol.integrality:
            best_val, best = bound, sol
            continue
        nodes += 1
        if nodes > node_limit:
            raise NodeLimit(f"branch and bound exceeded {node_limit} nodes")
        j = int(ints[j_local])
        v = sol.x[j]
        children = []
        up_down = up.copy()
        up_down[j] = math.floor(v)
        children.append((lo, up_down))
        lo_up = lo.copy()
        lo_up[j] = math.ceil(v)
        children.append((lo_up, up))
        for c_lo, c_up in children:
            if c_lo[j] > c_up[j]:
                continue
            child = solve_lp(lp.with_bounds(c_lo, c_up), tol)
            iterations += child.iterations
            if child.status is Status.UNBOUNDED:
                child.nodes = nodes
                return child
            if not child.optimal:
                continue
            cb = sign * child.objective
            if cb < best_val - _gap(best_val):
                counter += 1
                heapq.heappush(heap, (cb, negdepth - 1, counter, c_lo, c_up, child))

    if best is None:
        return LpSolution(Status.INFEASIBLE, iterations=iterations, nodes=nodes)
    x = best.x.copy()
    x[ints] = np.round(x[ints])
    return LpSolution(Status.OPTIMAL, x=x, objective=float(lp.objective @ x),
                      duals=best.duals, iterations=iterations, nodes=nodes)


def _gap(value: float) -> float:
    if not math.isfinite(value):
        return 0.0
    return 1e-9 * max(1.0, abs(value))


# --------------------------------------------------------------------------
# model assembly helper


class ProgramBuilder:
    """Incrementally assemble a :class:`LinearProgram` from column blocks.

    Columns are added in blocks (``add_vars``) and rows reference them by the
    returned index arrays, which keeps the program builders in the solvers
    free of manual offset bookkeeping.
    """

    def __init__(self):
        self._lower: list[np.ndarray] = []
        self._upper: list[np.ndarray] = []
        self._obj: list[np.ndarray] = []
        self._n = 0
        self._integer: list[int] = []
        self._blocks: list[tuple[int, list]] = []
        self._senses: list[str] = []
        self._rhs: list[np.ndarray] = []
        self._n_rows = 0

    @property
    def num_vars(self) -> int:
        return self._n

    @property
    def num_rows(self) -> int:
        return self._n_rows

    def add_vars(self, count: int, lower=-math.inf, upper=math.inf, cost=0.0,
                 integer=False) -> np.ndarray:
        idx = np.arange(self._n, self._n + count)
        self._lower.append(np.broadcast_to(np.asarray(lower, float), (count,)))
        self._upper.append(np.broadcast_to(np.asarray(upper, float), (count,)))
        self._obj.append(np.broadcast_to(np.asarray(cost, float), (count,)))
        self._n += count
        if integer is True:
            self._integer.extend(idx.tolist())
        elif integer is not False:
            self._integer.extend(int(idx[i]) for i in integer)
        return idx

    def add_rows(self, blocks, sense: str, rhs) -> None:
        """Add ``len(rhs)`` rows; ``blocks`` holds ``(indices, matrix)`` pairs.

        Each matrix has one row per new constraint and one column per index;
        1-D coefficient arrays are broadcast across the new rows.
        """
        rhs = np.atleast_1d(np.asarray(rhs, float))
        r = rhs.size
        prepared = []
        for idx, coef in blocks:
            idx = np.atleast_1d(idx)
            if idx.size == 0:
                continue
            coef = np.broadcast_to(np.asarray(coef, float), (r, idx.size))
            prepared.append((idx, coef))
        self._blocks.append((self._n_rows, prepared))
        self._senses.extend([sense] * r)
        self._rhs.append(rhs)
        self._n_rows += r

    def add_row(self, terms, sense: str, rhs: float) -> None:
        """Single row; ``terms`` is an iterable of ``(indices, coefficients)`` pairs."""
        self.add_rows([(idx, np.atleast_1d(np.asarray(coef, float))[None, :]
                        if np.ndim(coef) else coef) for idx, coef in terms], sense, [rhs])

    def build(self, maximize: bool = False) -> tuple[LinearProgram, IntegralitySpec]:
        M = np.zeros((self._n_rows, self._n))
        for start, blocks in self._blocks:
            for idx, coef in blocks:
                M[start:start + coef.shape[0], idx] += coef
        cat = (lambda parts: np.concatenate(parts) if parts else np.zeros(0))
        lp = LinearProgram(cat(self._obj), M, self._senses, cat(self._rhs),
                           cat(self._lower), cat(self._upper), maximize)
        return lp, IntegralitySpec(tuple(self._integer))
