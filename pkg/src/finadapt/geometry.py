"""Face lattice of a V-polytope at desk scale.

Faces are found by brute force: every affinely independent ``d``-subset of
the points spans a candidate hyperplane in the affine hull, and it supports a
facet when all points lie weakly on one side.  Lower faces are intersections
of facet vertex sets.  Fine for the small uncertainty sets this package
targets (at most 12 points in at most 4 dimensions by default).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL
from .errors import DegenerateInput, DimensionMismatch, OutOfRange, TooLarge
from .lp import GE, LE, EQ, ProgramBuilder, solve_lp

MAX_POINTS = 12
MAX_AMBIENT_DIM = 4
DUPLICATE_TOL = 1e-9
_SIDE_TOL = 1e-9


@dataclass(frozen=True)
class Face:
    vertex_indices: frozenset
    dimension: int


@dataclass(frozen=True)
class OrientedEdge:
    tail: int
    head: int

    def __post_init__(self):
        if self.tail == self.head:
            raise ValueError("edge endpoints must differ")


@dataclass(frozen=True, eq=False)
class Polytope:
    vertices: np.ndarray
    affine_dimension: int
    faces: tuple = field(repr=False)
    edges: tuple = field(repr=False)

    @property
    def ambient_dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    def faces_of_dimension(self, dim: int) -> list[Face]:
        return [f for f in self.faces if f.dimension == dim]

    @property
    def two_faces(self) -> list[Face]:
        return self.faces_of_dimension(2)

    @property
    def top_face(self) -> Face:
        return self.faces[-1]

    def edge_index(self, a: int, b: int) -> int:
        for k, e in enumerate(self.edges):
            if {e.tail, e.head} == {a, b}:
                return k
        raise KeyError((a, b))

    def face_edges(self, face: Face) -> list[int]:
        """Indices of the edges lying in ``face``."""
        return [k for k, e in enumerate(self.edges)
                if e.tail in face.vertex_indices and e.head in face.vertex_indices]

    def edge_point(self, edge: OrientedEdge | int, alpha: float) -> np.ndarray:
        if not isinstance(edge, OrientedEdge):
            edge = self.edges[edge]
        return edge_point(self.vertices[edge.tail], self.vertices[edge.head], alpha)

    def polygon_order(self, face: Face | None = None) -> list[int]:
        """Vertex indices of a 2-face in counter-clockwise cyclic order."""
        face = face or self.top_face
        if face.dimension != 2:
            raise ValueError("polygon_order needs a two-dimensional face")
        idx = sorted(face.vertex_indices)
        pts = self.vertices[idx]
        center = pts.mean(axis=0)
        basis = _affine_basis(pts, DEFAULT_TOL.rank)
        local = (pts - center) @ basis.T
        angles = np.arctan2(local[:, 1], local[:, 0])
        order = [idx[i] for i in np.argsort(angles, kind="stable")]
        if self.ambient_dimension == 2:
            # orient counter-clockwise in world coordinates
            p = self.vertices[order]
            area = np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1])
            if area < 0:
                order = order[::-1]
        return order


def edge_point(tail: np.ndarray, head: np.ndarray, alpha: float) -> np.ndarray:
    """Point ``(1 - alpha) * tail + alpha * head`` of a directed edge."""
    if not -1e-12 <= alpha <= 1 + 1e-12:
        raise OutOfRange(f"edge parameter {alpha} outside [0, 1]")
    return (1.0 - alpha) * np.asarray(tail, float) + alpha * np.asarray(head, float)


def affine_rank(points: np.ndarray, rel_tol: float = DEFAULT_TOL.rank) -> int:
    points = np.atleast_2d(np.asarray(points, float))
    if points.shape[0] <= 1:
        return 0
    centered = points - points[0]
    s = np.linalg.svd(centered, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _affine_basis(points: np.ndarray, rel_tol: float) -> np.ndarray:
    """Orthonormal rows spanning the directions of the affine hull."""
    centered = points - points.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, points.shape[1]))
    rank = int(np.sum(s > rel_tol * s[0]))
    return vt[:rank]


def _dedupe(points: np.ndarray) -> np.ndarray:
    keep = []
    for i, p in enumerate(points):
        if all(np.linalg.norm(p - points[j]) > DUPLICATE_TOL for j in keep):
            keep.append(i)
    return points[keep]


def _facets(local: np.ndarray) -> list[frozenset]:
    """Vertex sets of the facets of a full-dimensional point set in R^d."""
    n, d = local.shape
    scale = max(1.0, float(np.abs(local).max()))
    found: set[frozenset] = set()
    for subset in itertools.combinations(range(n), d):
        base = local[list(subset)]
        diffs = base[1:] - base[0]
        if d == 1:
            normal = np.array([1.0])
        else:
            # normal = null vector of the d-1 difference vectors
            _, s, vt = np.linalg.svd(diffs)
            if s.size < d - 1 or s[-1] <= DEFAULT_TOL.rank * max(s[0], 1e-300):
                continue
            normal = vt[-1]
        offset = normal @ base[0]
        side = local @ normal - offset
        tol = _SIDE_TOL * scale
        if np.all(side <= tol) or np.all(side >= -tol):
            on = frozenset(np.flatnonzero(np.abs(side) <= tol).tolist())
            found.add(on)
    return sorted(found, key=lambda s: sorted(s))


def build_polytope(points, max_points: int = MAX_POINTS,
                   max_dim: int = MAX_AMBIENT_DIM) -> Polytope:
    """Build the convex hull of ``points`` together with its face lattice.

    Non-extreme input points are dropped; the surviving vertices keep their
    relative input order.  Faces up to dimension 2 are listed (plus the
    polytope itself as the last face).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise DimensionMismatch("points must form a 2-D array")
    if pts.shape[0] == 0:
        raise DegenerateInput("no points given")
    if pts.shape[0] > max_points or pts.shape[1] > max_dim:
        raise TooLarge(
            f"{pts.shape[0]} points in dimension {pts.shape[1]} exceeds "
            f"the cap of {max_points} points / dimension {max_dim}"
        )
    if not np.isfinite(pts).all():
        raise DegenerateInput("non-finite coordinates")
    pts = _dedupe(pts)
    dim = affine_rank(pts)

    if dim == 0:
        verts = pts[:1]
        faces = (Face(frozenset({0}), 0),)
        return Polytope(_frozen(verts), 0, faces, ())

    basis = _affine_basis(pts, DEFAULT_TOL.rank)
    local = (pts - pts.mean(axis=0)) @ basis.T
    facets = _facets(local)
    n = pts.shape[0]
    # a point is extreme iff the facets through it meet only in it
    extreme = []
    for i in range(n):
        common = set(range(n))
        for f in facets:
            if i in f:
                common &= f
        if common == {i}:
            extreme.append(i)
    if len(extreme) < n:
        keep = extreme
        remap = {old: new for new, old in enumerate(keep)}
        pts = pts[keep]
        facets = [frozenset(remap[i] for i in f if i in remap) for f in facets]
        facets = sorted(set(facets), key=lambda s: sorted(s))
        n = len(keep)

    # close the facet sets under intersection
    lattice: set[frozenset] = set(facets)
    frontier = set(facets)
    while frontier:
        new = set()
        for a in frontier:
            for f in facets:
                inter = a & f
                if inter and inter not in lattice:
                    new.add(inter)
        lattice |= new
        frontier = new

    faces = []
    for vs in lattice:
        r = affine_rank(pts[sorted(vs)])
        if r <= 2 and r < dim:
            faces.append(Face(frozenset(vs), r))
    faces.sort(key=lambda f: (f.dimension, sorted(f.vertex_indices)))
    faces.append(Face(frozenset(range(n)), dim))

    edges = []
    for f in faces:
        if f.dimension != 1:
            continue
        a, b = sorted(f.vertex_indices)
        if tuple(pts[b]) < tuple(pts[a]):
            a, b = b, a
        edges.append(OrientedEdge(a, b))
    edges.sort(key=lambda e: (min(e.tail, e.head), max(e.tail, e.head)))
    return Polytope(_frozen(pts), dim, tuple(faces), tuple(edges))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def hull_distance(points, x, tol=DEFAULT_TOL) -> float:
    """Infinity-norm distance from ``x`` to ``conv(points)``, via one LP."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x = np.asarray(x, dtype=float).reshape(-1)
    if points.shape[0] == 0:
        return math.inf
    if x.size != points.shape[1]:
        raise DimensionMismatch(
            f"point has dimension {x.size}, hull lives in R^{points.shape[1]}"
        )
    pb = ProgramBuilder()
    lam = pb.add_vars(points.shape[0], lower=0.0)
    s = pb.add_vars(1, lower=0.0, cost=1.0)
    pb.add_row([(lam, 1.0)], EQ, 1.0)
    for j in range(x.size):
        pb.add_row([(lam, points[:, j]), (s, -1.0)], LE, x[j])
        pb.add_row([(lam, points[:, j]), (s, 1.0)], GE, x[j])
    lp, _ = pb.build()
    return solve_lp(lp, tol).objective


def distance_to_polytope(p: Polytope, x, tol=DEFAULT_TOL) -> float:
    return hull_distance(p.vertices, x, tol)


def contains_point(p: Polytope, x, tol: float = 1e-7) -> bool:
    return distance_to_polytope(p, x) <= tol
