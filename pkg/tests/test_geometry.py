import itertools

import numpy as np
import pytest

from finadapt.errors import DegenerateInput, OutOfRange, TooLarge
from finadapt.geometry import affine_rank, build_polytope, contains_point, edge_point

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
CUBE = list(itertools.product((0, 1), repeat=3))


def test_square_lattice():
    p = build_polytope(SQUARE)
    assert p.num_vertices == 4
    assert len(p.edges) == 4
    assert len(p.two_faces) == 1
    assert p.top_face.dimension == 2
    assert p.top_face.vertex_indices == frozenset(range(4))


def test_segment_lattice():
    p = build_polytope([[0.0], [1.0]])
    assert p.num_vertices == 2
    assert len(p.edges) == 1
    assert p.two_faces == []
    assert p.affine_dimension == 1


def test_cube_lattice():
    p = build_polytope(CUBE)
    assert p.num_vertices == 8
    assert len(p.edges) == 12
    assert len(p.two_faces) == 6
    for f in p.two_faces:
        assert len(f.vertex_indices) == 4
        assert len(p.face_edges(f)) == 4


def test_interior_points_dropped_and_order_kept():
    p = build_polytope([(0, 0), (0.5, 0.5), (1, 0), (0.2, 0.1), (0, 1)])
    assert p.vertices.tolist() == [[0, 0], [1, 0], [0, 1]]


def test_duplicates_collapse():
    p = build_polytope([(0, 0), (0, 0), (1, 0)])
    assert p.num_vertices == 2


def test_caps_and_degenerate_input():
    with pytest.raises(TooLarge):
        build_polytope(np.random.default_rng(0).normal(size=(13, 2)))
    with pytest.raises(TooLarge):
        build_polytope([[0] * 5, [1] * 5])
    with pytest.raises(DegenerateInput):
        build_polytope(np.zeros((0, 2)))


def test_segment_in_the_plane():
    p = build_polytope([(0, 0), (0.5, 0.5), (1, 1)])
    assert p.affine_dimension == 1
    assert p.num_vertices == 2 and len(p.edges) == 1


def test_edge_orientation_is_lexicographic():
    p = build_polytope([(1, 1), (0, 1), (0, 0), (1, 0)])
    for e in p.edges:
        assert tuple(p.vertices[e.tail]) < tuple(p.vertices[e.head])


def test_rebuild_is_identical():
    a, b = build_polytope(CUBE), build_polytope(CUBE)
    assert a.vertices.tobytes() == b.vertices.tobytes()
    assert a.edges == b.edges
    assert [f.vertex_indices for f in a.faces] == [f.vertex_indices for f in b.faces]


@pytest.mark.parametrize("seed", range(5))
def test_polygons_have_as_many_edges_as_vertices(seed):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, 7))
    p = build_polytope(np.column_stack([np.cos(ang), np.sin(ang)]))
    assert len(p.edges) == p.num_vertices
    order = p.polygon_order()
    # consecutive vertices in the cyclic order are joined by edges
    for a, b in zip(order, order[1:] + order[:1]):
        p.edge_index(a, b)


def test_faces_closed_under_intersection():
    p = build_polytope(CUBE)
    sets = {f.vertex_indices for f in p.faces}
    for f, g in itertools.combinations(p.faces, 2):
        common = f.vertex_indices & g.vertex_indices
        if common:
            assert common in sets
            assert affine_rank(p.vertices[sorted(common)]) == next(
                h.dimension for h in p.faces if h.vertex_indices == common)


def test_two_face_edge_cycles_are_closed():
    p = build_polytope(CUBE)
    for f in p.two_faces:
        degree = {v: 0 for v in f.vertex_indices}
        for e in p.face_edges(f):
            degree[p.edges[e].tail] += 1
            degree[p.edges[e].head] += 1
        assert set(degree.values()) == {2}


def test_contains_point():
    p = build_polytope(SQUARE)
    assert contains_point(p, (0.5, 0.5))
    assert not contains_point(p, (2, 2))
    assert contains_point(p, (1.0, 0.5))
    for v in p.vertices:
        assert contains_point(p, v)
    for e in range(len(p.edges)):
        assert contains_point(p, p.edge_point(e, 0.5))


def test_edge_points():
    seg = build_polytope([[0.0], [1.0]])
    assert seg.edge_point(0, 0.0).tolist() == [0.0]
    assert seg.edge_point(0, 0.5).tolist() == [0.5]
    sq = build_polytope(SQUARE)
    e = sq.edge_index(0, 1)
    assert sq.edge_point(e, 1 / 3) == pytest.approx([1 / 3, 0])
    with pytest.raises(OutOfRange):
        edge_point(np.zeros(2), np.ones(2), 1.5)
