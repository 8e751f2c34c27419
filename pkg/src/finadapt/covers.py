"""Convex covers of the 1-skeleton of a polytope for two or three pieces.

Piece indices are 0-based throughout: a vertex membership or an edge label is
stored as a bitmask over ``range(k)``, so the 1-based label ``{1, 3}`` is
``0b101`` here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .config import DEFAULT_TOL
from .geometry import Face, Polytope, hull_distance
from .lp import EQ, ProgramBuilder, solve_lp

# interior placements used to decide which 2-faces need a shared point
DEFAULT_T = 0.5
DEFAULT_U = 1.0 / 3.0
DEFAULT_V = 2.0 / 3.0


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def members(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class VertexCover:
    """Membership of each vertex in the pieces ``V_0 .. V_{k-1}``."""

    k: int
    membership: tuple[int, ...]

    def __post_init__(self):
        full = (1 << self.k) - 1
        for m in self.membership:
            if not 0 < m <= full:
                raise ValueError(f"vertex membership {m:b} is not a nonempty subset of range({self.k})")

    def piece(self, i: int) -> frozenset:
        return frozenset(v for v, m in enumerate(self.membership) if m >> i & 1)

    def pieces(self) -> list[frozenset]:
        return [self.piece(i) for i in range(self.k)]

    def permuted(self, perm) -> "VertexCover":
        return VertexCover(self.k, tuple(_permute_mask(m, perm) for m in self.membership))

    def describe(self) -> list[list[int]]:
        return [sorted(s) for s in self.pieces()]


def _permute_mask(mask: int, perm) -> int:
    out = 0
    for i in members(mask):
        out |= 1 << perm[i]
    return out


def is_canonical(membership: tuple[int, ...], k: int) -> bool:
    """True iff no relabelling of the pieces gives a lexicographically smaller tuple."""
    for perm in itertools.permutations(range(k)):
        image = tuple(_permute_mask(m, perm) for m in membership)
        if image < membership:
            return False
    return True


def enumerate_vertex_covers(p: Polytope, k: int, symmetry: bool = True) -> Iterator[VertexCover]:
    """Every assignment of each vertex to a nonempty subset of ``range(k)``.

    With ``symmetry`` only the lexicographically smallest member of each
    orbit under relabelling the pieces is produced.
    """
    if k not in (2, 3):
        raise ValueError("vertex covers are enumerated for k = 2 or 3 only")
    for membership in itertools.product(range(1, 1 << k), repeat=p.num_vertices):
        if symmetry and not is_canonical(membership, k):
            continue
        yield VertexCover(k, membership)


def label_is_valid(label: int, tail_mask: int, head_mask: int, k: int = 3) -> bool:
    """Conditions on an edge label given the pieces holding its endpoints."""
    idx = members(label)
    if not idx or label >> k:
        return False
    if len(idx) == 1:
        return bool(tail_mask & head_mask & label)
    if len(idx) == 2:
        i, j = idx
        return bool((tail_mask >> i & 1 and head_mask >> j & 1)
                    or (tail_mask >> j & 1 and head_mask >> i & 1))
    if len(idx) == 3:
        for i, j in itertools.permutations(idx, 2):
            (l,) = set(idx) - {i, j}
            if tail_mask >> i & 1 and head_mask >> j & 1 and not (tail_mask | head_mask) >> l & 1:
                return True
        return False
    return False


def edge_label_options(tail_mask: int, head_mask: int, k: int = 3) -> list[int]:
    """Valid labels of an edge, singletons first, then pairs, then the full set."""
    labels = [m for m in range(1, 1 << k) if label_is_valid(m, tail_mask, head_mask, k)]
    return sorted(labels, key=lambda m: (popcount(m), members(m)))


def enumerate_labelings(p: Polytope, vc: VertexCover) -> Iterator[tuple[int, ...]]:
    """All edge labelings compatible with ``vc`` (k = 3)."""
    if vc.k != 3:
        raise ValueError("labelings are only enumerated for k = 3; use forced_labeling for k = 2")
    options = [edge_label_options(vc.membership[e.tail], vc.membership[e.head], 3)
               for e in p.edges]
    if any(not o for o in options):
        return
    yield from itertools.product(*options)


def forced_labeling(p: Polytope, vc: VertexCover) -> tuple[int, ...]:
    """Labels for k = 2: a shared piece if the endpoints share one, else both pieces."""
    labels = []
    for e in p.edges:
        shared = vc.membership[e.tail] & vc.membership[e.head]
        labels.append(1 << members(shared)[0] if shared else 0b11)
    return tuple(labels)


@dataclass(frozen=True, eq=False)
class SkeletonCover:
    """Vertex cover, edge labels and the placements of the edge points.

    ``alpha_t`` maps each 2-labelled edge to the parameter of ``t_e``;
    ``alpha_u``/``alpha_v`` do the same for ``u_e <= v_e`` on 3-labelled edges.
    Parameters run from the tail (0) to the head (1).
    """

    polytope: Polytope
    vertex_cover: VertexCover
    labels: tuple[int, ...]
    alpha_t: dict = field(default_factory=dict)
    alpha_u: dict = field(default_factory=dict)
    alpha_v: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.vertex_cover.k

    @classmethod
    def with_placements(cls, p: Polytope, vc: VertexCover, labels, t=DEFAULT_T,
                        u=DEFAULT_U, v=DEFAULT_V) -> "SkeletonCover":
        at, au, av = {}, {}, {}
        for e, lab in enumerate(labels):
            n = popcount(lab)
            if n == 2:
                at[e] = t
            elif n == 3:
                au[e], av[e] = u, v
        return cls(p, vc, tuple(labels), at, au, av)

    def is_valid(self) -> bool:
        p, vc = self.polytope, self.vertex_cover
        if len(self.labels) != len(p.edges):
            return False
        for e, (edge, lab) in enumerate(zip(p.edges, self.labels)):
            if not label_is_valid(lab, vc.membership[edge.tail], vc.membership[edge.head], self.k):
                return False
            n = popcount(lab)
            if n == 2 and not 0 <= self.alpha_t.get(e, -1) <= 1:
                return False
            if n == 3:
                au, av = self.alpha_u.get(e, -1), self.alpha_v.get(e, -1)
                if not 0 <= au <= av <= 1:
                    return False
        return True

    def edge_params(self, i: int, e: int) -> list[float]:
        """Parameters along edge ``e`` of the points of ``vbar(i)`` lying on it."""
        edge = self.polytope.edges[e]
        tail_in = self.vertex_cover.membership[edge.tail] >> i & 1
        head_in = self.vertex_cover.membership[edge.head] >> i & 1
        out = []
        if tail_in:
            out.append(0.0)
        if head_in:
            out.append(1.0)
        lab = self.labels[e]
        n = popcount(lab)
        if n == 2 and lab >> i & 1:
            out.append(self.alpha_t[e])
        elif n == 3:
            if not tail_in and not head_in:
                out += [self.alpha_u[e], self.alpha_v[e]]
            else:
                if tail_in:
                    out.append(self.alpha_u[e])
                if head_in:
                    out.append(self.alpha_v[e])
        return out

    def edge_point_params(self, i: int) -> list[tuple[int, float]]:
        """Edge points (not vertices) of ``vbar(i)`` as ``(edge, parameter)``."""
        out = []
        vc = self.vertex_cover
        for e, edge in enumerate(self.polytope.edges):
            lab = self.labels[e]
            n = popcount(lab)
            tail_in = vc.membership[edge.tail] >> i & 1
            head_in = vc.membership[edge.head] >> i & 1
            if n == 2 and lab >> i & 1:
                out.append((e, self.alpha_t[e]))
            elif n == 3:
                if not tail_in and not head_in:
                    out += [(e, self.alpha_u[e]), (e, self.alpha_v[e])]
                else:
                    if tail_in:
                        out.append((e, self.alpha_u[e]))
                    if head_in:
                        out.append((e, self.alpha_v[e]))
        return out

    def describe(self) -> dict:
        return {
            "k": self.k,
            "vertex_sets": self.vertex_cover.describe(),
            "labels": [list(members(m)) for m in self.labels],
            "alpha_t": {str(e): a for e, a in sorted(self.alpha_t.items())},
            "alpha_u": {str(e): a for e, a in sorted(self.alpha_u.items())},
            "alpha_v": {str(e): a for e, a in sorted(self.alpha_v.items())},
        }


def build_vbar(sc: SkeletonCover, i: int) -> np.ndarray:
    """Points of ``V_i`` plus the edge points that piece ``i`` must contain."""
    p = sc.polytope
    pts = [p.vertices[v] for v in sorted(sc.vertex_cover.piece(i))]
    pts += [p.edge_point(e, a) for e, a in sc.edge_point_params(i)]
    if not pts:
        return np.zeros((0, p.ambient_dimension))
    return np.array(pts)


def _segment_meets_hulls(a: np.ndarray, b: np.ndarray, P: np.ndarray, Q: np.ndarray) -> bool:
    """Is there a point on ``[a, b]`` in ``conv(P)`` and in ``conv(Q)``?"""
    pb = ProgramBuilder()
    beta = pb.add_vars(2, lower=0.0)
    mu = pb.add_vars(P.shape[0], lower=0.0)
    nu = pb.add_vars(Q.shape[0], lower=0.0)
    pb.add_row([(beta, 1.0)], EQ, 1.0)
    pb.add_row([(mu, 1.0)], EQ, 1.0)
    pb.add_row([(nu, 1.0)], EQ, 1.0)
    for j in range(a.size):
        pb.add_row([(beta, [a[j], b[j]]), (mu, -P[:, j])], EQ, 0.0)
        pb.add_row([(beta, [a[j], b[j]]), (nu, -Q[:, j])], EQ, 0.0)
    lp, _ = pb.build()
    return solve_lp(lp).optimal


def compute_F(p: Polytope, vc: VertexCover, labels, t=DEFAULT_T, u=DEFAULT_U,
              v=DEFAULT_V) -> list[Face]:
    """Two-faces on whose boundary the three skeleton pieces pairwise meet.

    Decided by one feasibility LP per (face, pair of pieces, edge of the face),
    with the edge points placed in the relative interior of their edges.
    """
    if vc.k != 3:
        return []
    sc = SkeletonCover.with_placements(p, vc, labels, t, u, v)
    vbars = [build_vbar(sc, i) for i in range(3)]
    if any(vb.shape[0] == 0 for vb in vbars):
        return []
    out = []
    for f in p.two_faces:
        edges = p.face_edges(f)
        ok = True
        for i, j in itertools.combinations(range(3), 2):
            if not any(_segment_meets_hulls(p.vertices[p.edges[e].tail], p.vertices[p.edges[e].head],
                                            vbars[i], vbars[j]) for e in edges):
                ok = False
                break
        if ok:
            out.append(f)
    return out


def compute_F_by_intervals(p: Polytope, vc: VertexCover, labels, t=DEFAULT_T, u=DEFAULT_U,
                           v=DEFAULT_V) -> list[Face]:
    """Same set as :func:`compute_F`, decided combinatorially.

    An edge is a face of the polytope, so the hull of a piece's points meets
    the edge exactly in the hull of the points lying on it: an interval of
    edge parameters.  Pieces meet on an edge iff their intervals overlap.
    """
    if vc.k != 3:
        return []
    sc = SkeletonCover.with_placements(p, vc, labels, t, u, v)
    for i in range(3):
        if not vc.piece(i) and not sc.edge_point_params(i):
            return []
    meets = set()
    for e in range(len(p.edges)):
        spans = []
        for i in range(3):
            ps = sc.edge_params(i, e)
            spans.append((min(ps), max(ps)) if ps else None)
        for i, j in itertools.combinations(range(3), 2):
            if spans[i] and spans[j] and max(spans[i][0], spans[j][0]) <= min(spans[i][1], spans[j][1]) + 1e-12:
                meets.add((e, i, j))
    out = []
    for f in p.two_faces:
        edges = p.face_edges(f)
        if all(any((e, i, j) in meets for e in edges)
               for i, j in itertools.combinations(range(3), 2)):
            out.append(f)
    return out


def skeleton_coverage_gaps(sc: SkeletonCover, samples: int = 21, tol: float = 1e-7) -> list[tuple[int, float]]:
    """Sampled edge points not inside any ``conv(vbar(i))``.

    An empty result means the pieces cover the 1-skeleton at every sample.
    """
    p = sc.polytope
    vbars = [build_vbar(sc, i) for i in range(sc.k)]
    gaps = []
    for e in range(len(p.edges)):
        for a in np.linspace(0.0, 1.0, samples):
            x = p.edge_point(e, float(a))
            if not any(vb.shape[0] and hull_distance(vb, x) <= tol for vb in vbars):
                gaps.append((e, float(a)))
    return gaps
