import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from teichtqft.errors import DuplicateSlot, InvalidIndex, SelfPairedFace, TqftError
from teichtqft.mesh import (EDGES, FaceSlot, boundary_split, build_triangulation, face_map,
                            face_sign, homology_h2_truncated, single_tetrahedron,
                            truncated_chain_complex, vertex_links)

from oracles import closed_gluings, perfect_matchings


@st.composite
def gluings(draw, max_tets=3):
    n = draw(st.integers(1, max_tets))
    slots = [(t, f) for t in range(n) for f in range(4)]
    order = draw(st.permutations(slots))
    k = draw(st.integers(0, len(slots) // 2))
    pairs = [order[2 * i] + order[2 * i + 1] for i in range(k)]
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n))
    return signs, pairs


def test_face_map_is_order_preserving():
    for f, g in itertools.product(range(4), repeat=2):
        m = face_map(f, g)
        src = sorted(m)
        assert [m[v] for v in src] == sorted(m.values())


def test_face_signs_alternate():
    assert [face_sign(1, i) for i in range(4)] == [1, -1, 1, -1]
    assert [face_sign(-1, i) for i in range(4)] == [-1, 1, -1, 1]


def test_trefoil_cells(trefoil):
    c = trefoil.cells
    assert trefoil.is_closed
    assert c.num_vertices == 1
    assert sorted(c.valences) == [2, 10]


def test_fig8_cells(fig8):
    c = fig8.cells
    assert c.num_edges == 2 and c.num_vertices == 1
    assert c.valences == (6, 6)


def test_five2_cells(five2):
    c = five2.cells
    assert c.num_edges == 3 and c.num_vertices == 1
    assert sorted(c.valences) == [5, 6, 7]


def test_single_tetrahedron():
    t = single_tetrahedron()
    assert len(t.boundary) == 4
    assert t.cells.num_edges == 6 and t.cells.valences == (1,) * 6
    assert t.cells.num_vertices == 4
    links = vertex_links(t)
    assert [l.kind for l in links] == ["disk"] * 4
    assert all(l.euler_characteristic == 1 for l in links)


def test_class_representatives_are_lexicographically_smallest(five2):
    for cls in five2.cells.edge_classes:
        assert list(cls) == sorted(cls)
    firsts = [cls[0] for cls in five2.cells.edge_classes]
    assert firsts == sorted(firsts)


def test_boundary_split_of_single_tets():
    plus, minus = boundary_split(single_tetrahedron(1))
    assert [s.face for s in plus] == [0, 2] and [s.face for s in minus] == [1, 3]
    plus, minus = boundary_split(single_tetrahedron(-1))
    assert [s.face for s in plus] == [1, 3]


def test_closed_boundary_is_empty(fig8):
    assert boundary_split(fig8) == ((), ())


@pytest.mark.parametrize("name", ["fig8", "five2", "trefoil"])
def test_corpus_links_are_tori(name, request):
    tri = request.getfixturevalue(name)
    links = vertex_links(tri)
    assert len(links) == 1
    (l,) = links
    assert l.kind == "torus" and l.orientable and l.betti == (1, 2, 1)
    assert l.euler_characteristic == 0


@pytest.mark.parametrize("name", ["fig8", "five2", "trefoil"])
def test_corpus_h2_vanishes(name, request):
    h = homology_h2_truncated(request.getfixturevalue(name))
    assert h.rank == 0 and h.torsion == () and h.is_admissible_topology


def test_truncated_boundary_squares_to_zero(five2):
    _, d1, d2, d3 = truncated_chain_complex(five2)
    d1, d2, d3 = (np.array(m) for m in (d1, d2, d3))
    assert not np.any(d1 @ d2) and not np.any(d2 @ d3)


def test_h2_against_float_rank(fig8, five2):
    # independent route: floating point ranks of the same boundary maps
    for tri in (fig8, five2):
        cells, _, d2, d3 = truncated_chain_complex(tri)
        r2 = np.linalg.matrix_rank(np.array(d2, float))
        r3 = np.linalg.matrix_rank(np.array(d3, float))
        assert homology_h2_truncated(tri).rank == len(cells[2]) - r2 - r3


def test_brute_force_finds_nonadmissible_complex():
    found = None
    for n in (1, 2):
        for signs, glue in closed_gluings(n):
            try:
                tri = build_triangulation(signs, glue)
            except TqftError:
                continue
            h = homology_h2_truncated(tri)
            if h.rank or h.torsion:
                found = tri
                break
        if found:
            break
    assert found is not None
    assert not homology_h2_truncated(found).is_admissible_topology


def test_every_closed_two_tet_gluing_is_counted():
    assert sum(1 for _ in perfect_matchings(range(8))) == 105


@pytest.mark.parametrize("glue, err", [
    ([(0, 0, 0, 0)], SelfPairedFace),
    ([(0, 0, 1, 1), (0, 0, 1, 2)], DuplicateSlot),
    ([(0, 0, 7, 1)], InvalidIndex),
    ([(0, 4, 1, 1)], InvalidIndex),
])
def test_build_rejects_bad_gluings(glue, err):
    with pytest.raises(err):
        build_triangulation([1, 1], glue)


def test_gamma_must_name_edges(fig8):
    with pytest.raises(InvalidIndex):
        build_triangulation(fig8.signs, fig8.gluings, gamma=[5])
    assert build_triangulation(fig8.signs, fig8.gluings, gamma=[1]).gamma == {1}


@given(gluings())
def test_counting_identities(data):
    signs, glue = data
    tri = build_triangulation(signs, glue)
    c = tri.cells
    assert sum(c.valences) == 6 * tri.n
    assert sum(len(v) for v in c.vertex_classes) == 4 * tri.n
    plus, minus = boundary_split(tri)
    assert len(plus) + len(minus) == len(tri.boundary)


@given(gluings())
def test_link_euler_characteristic_two_ways(data):
    tri = build_triangulation(*data)
    try:
        links = vertex_links(tri)
    except TqftError:
        return
    for l in links:
        v, e, f = l.counts
        b0, b1, b2 = l.betti
        assert v - e + f == l.euler_characteristic == b0 - b1 + b2


@given(gluings(max_tets=3), st.randoms(use_true_random=False))
def test_homology_invariant_under_relabelling(data, rnd):
    tri = build_triangulation(*data)
    perm = list(range(tri.n))
    rnd.shuffle(perm)
    assert homology_h2_truncated(tri.relabel(perm)) == homology_h2_truncated(tri)


def test_relabel_preserves_edge_valences(five2):
    for perm in itertools.permutations(range(3)):
        assert sorted(five2.relabel(perm).cells.valences) == [5, 6, 7]
