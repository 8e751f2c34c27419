"""Built-in instances: the counter-examples (P), (Q), (R) and small synthetic cases."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownInstance
from .geometry import build_polytope
from .model import AffineMap, Instance, Method, Solution

INF = math.inf


@dataclass(frozen=True)
class KnownValue:
    """Expected optimum of ``solver`` at ``k``; ``value`` is None for infeasible."""

    solver: str
    k: int | None
    value: float | None
    origin: str
    scenarios: tuple | None = None

    @property
    def infeasible(self) -> bool:
        return self.value is None


@dataclass
class CorpusEntry:
    instance: Instance
    known_values: list[KnownValue] = field(default_factory=list)
    reference_solutions: list[tuple[Solution, float]] = field(default_factory=list)
    description: str = ""

    def known(self, solver: str, k: int | None = None) -> KnownValue:
        for kv in self.known_values:
            if kv.solver == solver and kv.k == k:
                return kv
        raise KeyError((solver, k))


def _segment():
    return build_polytope([[0.0], [1.0]])


def problem_p() -> CorpusEntry:
    # rows: x2 - x3 <= x1;  x3 <= w x4;  w x4 <= x2;  (w + 2) y + (3 - w) x4 = 10 (two rows)
    A0 = np.array([[-1, 1, -1, 0],
                   [0, 0, 1, 0],
                   [0, -1, 0, 0],
                   [0, 0, 0, 3],
                   [0, 0, 0, -3]], float)
    A1 = np.array([[0, 0, 0, 0],
                   [0, 0, 0, -1],
                   [0, 0, 0, 1],
                   [0, 0, 0, -1],
                   [0, 0, 0, 1]], float)
    B0 = np.array([[0], [0], [0], [2], [-2]], float)
    B1 = np.array([[0], [0], [0], [1], [-1]], float)
    b0 = np.array([0, 0, 0, 10, -10], float)
    inst = Instance(
        c=[1, 0, 0, 0], d=[0],
        A=AffineMap(A0, [A1]), B=AffineMap(B0, [B1]), b=AffineMap(b0, [np.zeros(5)]),
        omega=_segment(),
        x_bounds=[(0, None)] * 4, y_bounds=[(0, None)],
        name="P",
    )
    ref = Solution([2, 2, 0, 2], [[2]], 2.0)
    return CorpusEntry(
        inst,
        [
            KnownValue("comp", None, 0.0, "reference"),
            *[KnownValue("adapt", k, 2.0, "reference") for k in (1, 2, 3)],
            KnownValue("scenario_lb", 2, 2.0, "hand", (0.0, 0.5, 1.0)),
            KnownValue("scenario_lb", 3, 2.0, "hand", (0.0, 1 / 3, 2 / 3, 1.0)),
        ],
        [(ref, 2.0)],
        "finite gap: complete adaptability 0, every finite k gives 2",
    )


def problem_q() -> CorpusEntry:
    # rows: w - x1 <= y;  y <= w + x1;  x1 (w - 0.1) <= x2;  x2 <= x1 (w + 0.1)
    A0 = np.array([[-1, 0], [-1, 0], [-0.1, -1], [-0.1, 1]], float)
    A1 = np.array([[0, 0], [0, 0], [1, 0], [-1, 0]], float)
    B0 = np.array([[-1], [1], [0], [0]], float)
    b0 = np.zeros(4)
    b1 = np.array([-1, 1, 0, 0], float)
    inst = Instance(
        c=[1, 0], d=[0],
        A=AffineMap(A0, [A1]), B=AffineMap(B0, [np.zeros((4, 1))]), b=AffineMap(b0, [b1]),
        omega=_segment(),
        x_bounds=[(0, 1), (0, 1)], y_bounds=[(0, 1)],
        name="Q",
    )
    return CorpusEntry(
        inst,
        [
            KnownValue("comp", None, 0.0, "reference"),
            *[KnownValue("adapt", k, None, "reference") for k in (1, 2, 3)],
            KnownValue("scenario_lb", 1, None, "hand", (0.0, 1.0)),
            KnownValue("scenario_lb", 2, None, "hand", (0.0, 0.5, 1.0)),
            KnownValue("scenario_lb", 3, None, "hand", (0.0, 1 / 3, 2 / 3, 1.0)),
        ],
        [],
        "infinite gap: no finite k is feasible",
    )


def problem_r() -> CorpusEntry:
    # rows: (w2 - w1) y <= 1 - w1;  (w1 - w2) y <= 1 + w1;  y binary
    B0 = np.zeros((2, 1))
    B_w1 = np.array([[-1], [1]], float)
    B_w2 = np.array([[1], [-1]], float)
    b0 = np.array([1, 1], float)
    b_w1 = np.array([-1, 1], float)
    b_w2 = np.zeros(2)
    omega = build_polytope([(-2, 0), (0, -2), (2, 0), (0, 2)])
    inst = Instance(
        c=np.zeros(0), d=[0],
        A=AffineMap(np.zeros((2, 0)), np.zeros((2, 2, 0))),
        B=AffineMap(B0, [B_w1, B_w2]), b=AffineMap(b0, [b_w1, b_w2]),
        omega=omega, y_bounds=[(0, 1)], y_integer=(0,),
        name="R",
    )
    ref = Solution(np.zeros(0), [[0], [1]], 0.0)
    return CorpusEntry(inst, [KnownValue("adapt", 2, 0.0, "reference")], [(ref, 0.0)],
                       "convex cover that is not a partition")


# convex pieces of the (R) reference solution
R_PIECES = (
    ((-1, 1), (0, 2), (1, 1), (1, -1), (0, -2), (-1, -1)),
    ((-1, 1), (1, 1), (2, 0), (1, -1), (-1, -1), (-2, 0)),
)


def _scalar_band(omega, slope, low, high, name) -> Instance:
    """Scalar ``y`` with ``g(w) - low <= y <= g(w) + high``, ``g(w) = slope . w``; minimize y."""
    slope = np.asarray(slope, float)
    n = slope.size
    B0 = np.array([[-1.0], [1.0]])
    # -y <= -g(w) + low   and   y <= g(w) + high
    b0 = np.array([low, high], float)
    b_terms = [np.array([-s, s]) for s in slope]
    return Instance(
        c=np.zeros(0), d=[1.0],
        A=AffineMap(np.zeros((2, 0)), np.zeros((n, 2, 0))),
        B=AffineMap.constant(B0, n),
        b=AffineMap(b0, b_terms),
        omega=omega, name=name,
    )


def interval() -> CorpusEntry:
    # y >= w and y <= w + 0.5 on [0, 1]
    inst = _scalar_band(_segment(), [1.0], 0.0, 0.5, "interval")
    return CorpusEntry(
        inst,
        [
            KnownValue("adapt1", 1, None, "hand"),
            KnownValue("comp", None, 1.0, "hand"),
            KnownValue("1d", 1, None, "hand"),
            KnownValue("1d", 2, 1.0, "hand"),
            KnownValue("1d", 3, 1.0, "hand"),
            KnownValue("enum2", 2, 1.0, "hand"),
            KnownValue("milp2", 2, 1.0, "hand"),
            KnownValue("enum3", 3, 1.0, "hand"),
        ],
        [(Solution(np.zeros(0), [[0.5], [1.0]], 1.0), 1.0)],
        "band of width 0.5 over [0, 1]",
    )


def square() -> CorpusEntry:
    omega = build_polytope([(0, 0), (1, 0), (1, 1), (0, 1)])
    inst = _scalar_band(omega, [1.0, 1.0], 0.0, 1.5, "square")
    return CorpusEntry(
        inst,
        [
            KnownValue("adapt1", 1, None, "hand"),
            KnownValue("comp", None, 2.0, "hand"),
            KnownValue("enum2", 2, 2.0, "hand"),
            KnownValue("milp2", 2, 2.0, "hand"),
            KnownValue("enum3", 3, 2.0, "hand"),
        ],
        [(Solution(np.zeros(0), [[1.0], [2.0]], 2.0), 2.0)],
        "band of width 1.5 over the unit square along w1 + w2",
    )


def triangle() -> CorpusEntry:
    omega = build_polytope([(0, 0), (1, 0), (0, 1)])
    inst = _scalar_band(omega, [1.0, 2.0], 0.4, 0.4, "triangle")
    return CorpusEntry(
        inst,
        [
            KnownValue("adapt1", 1, None, "hand"),
            KnownValue("comp", None, 1.6, "hand"),
            KnownValue("enum2", 2, None, "hand"),
            KnownValue("milp2", 2, None, "hand"),
            KnownValue("enum3", 3, 1.6, "hand"),
        ],
        [(Solution(np.zeros(0), [[0.4], [0.8], [1.6]], 1.6), 1.6)],
        "band of half-width 0.4 around w1 + 2 w2 on the unit simplex",
    )


def deterministic() -> CorpusEntry:
    # min x s.t. x >= 3, with an idle bounded recourse variable
    inst = Instance(
        c=[1.0], d=[0.0],
        A=AffineMap.constant([[-1.0]], 1), B=AffineMap.constant([[0.0]], 1),
        b=AffineMap.constant([-3.0], 1),
        omega=_segment(), y_bounds=[(0, 1)], name="deterministic",
    )
    known = [KnownValue(s, k, 3.0, "inspection") for s, k in
             (("adapt1", 1), ("comp", None), ("1d", 1), ("1d", 2), ("1d", 3),
              ("enum2", 2), ("milp2", 2), ("enum3", 3))]
    return CorpusEntry(inst, known, [(Solution([3.0], [[0.0]], 3.0), 3.0)],
                       "no uncertainty in the data")


_REGISTRY = {
    "P": problem_p,
    "Q": problem_q,
    "R": problem_r,
    "interval": interval,
    "square": square,
    "triangle": triangle,
    "deterministic": deterministic,
}


def names() -> list[str]:
    return list(_REGISTRY)


def get_instance(name: str) -> CorpusEntry:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownInstance(f"unknown corpus instance {name!r}; choose from {', '.join(_REGISTRY)}") from None


# range of the constant part of b in random instances
B_CONST_RANGE = (0.0, 3.0)
B_SLOPE_RANGE = (-2.0, 2.0)


def _random_polygon(rng: np.random.Generator, n_vertices: int) -> np.ndarray:
    angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    # keep vertices well separated so every sample point is extreme
    while n_vertices > 1 and np.min(np.diff(np.append(angles, angles[0] + 2 * np.pi))) < 0.5:
        angles = np.sort(rng.uniform(0, 2 * np.pi, n_vertices))
    radius = rng.uniform(0.5, 1.0)
    pts = np.column_stack([np.cos(angles), np.sin(angles)]) * radius
    return np.round(pts, 3)


def generate_random(seed: int, dim: int = 2, rows: int = 4) -> Instance:
    """Small deterministic-A,B instance for property tests.

    One bounded first-stage variable, one or two bounded recourse variables,
    integer matrix entries in [-2, 2], and ``b`` with constant part in
    [0, 3] and slopes in [-2, 2].  Omega is a segment (dim 1) or a convex
    polygon with 3 to 5 vertices (dim 2).
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if not 1 <= rows <= 8:
        raise ValueError("rows must be between 1 and 8")
    rng = np.random.default_rng(seed)
    if dim == 1:
        a, b = np.sort(np.round(rng.uniform(-1, 1, 2), 3))
        if b - a < 0.2:
            b = a + 0.5
        omega = build_polytope([[a], [b]])
    else:
        omega = build_polytope(_random_polygon(rng, int(rng.integers(3, 6))))
    nx, ny = 1, int(rng.integers(1, 3))
    A = rng.integers(-2, 3, (rows, nx)).astype(float)
    B = rng.integers(-2, 3, (rows, ny)).astype(float)
    b0 = np.round(rng.uniform(*B_CONST_RANGE, rows), 2)
    slopes = [np.round(rng.uniform(*B_SLOPE_RANGE, rows), 2) for _ in range(dim)]
    c = np.round(rng.uniform(-1, 1, nx), 2)
    d = np.round(rng.uniform(-1, 1, ny), 2)
    return Instance(
        c=c, d=d,
        A=AffineMap.constant(A, dim), B=AffineMap.constant(B, dim), b=AffineMap(b0, slopes),
        omega=omega,
        x_bounds=[(-3, 3)] * nx, y_bounds=[(-3, 3)] * ny,
        name=f"random-{seed}-d{dim}-m{rows}",
    )
