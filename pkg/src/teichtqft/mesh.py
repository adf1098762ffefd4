"""Triangulated pseudo 3-manifolds glued from ordered tetrahedra.

A face ``(t, i)`` is the face of tetrahedron ``t`` opposite vertex ``i``.
Two faces are glued by the unique vertex bijection that preserves the
vertex order, so a gluing is just an unordered pair of face slots.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from . import exact
from .errors import DuplicateSlot, InvalidIndex, NonManifoldLink, SelfPairedFace

EDGES = tuple(itertools.combinations(range(4), 2))


class FaceSlot(NamedTuple):
    tet: int
    face: int


@dataclass(frozen=True)
class Tetrahedron:
    id: int
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InvalidIndex(f"tetrahedron {self.id}: sign must be +1 or -1, got {self.sign}")


def face_vertices(i: int) -> tuple[int, int, int]:
    return tuple(v for v in range(4) if v != i)


def face_map(f: int, g: int) -> dict[int, int]:
    """Order-preserving vertex bijection from face ``f`` onto face ``g``."""
    return dict(zip(face_vertices(f), face_vertices(g)))


def face_sign(tet_sign: int, i: int) -> int:
    return tet_sign * (-1) ** i


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        p = self.parent
        p.setdefault(a, a)
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the lexicographically smaller representative
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self, items: Iterable) -> list[list]:
        out = defaultdict(list)
        for x in items:
            out[self.find(x)].append(x)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


@dataclass(frozen=True)
class CellClasses:
    """Edge and vertex classes; ids are positions in the sorted class lists."""

    edge_classes: tuple[tuple[tuple[int, int, int], ...], ...]
    vertex_classes: tuple[tuple[tuple[int, int], ...], ...]
    edge_of: dict = field(repr=False, compare=False)
    vertex_of: dict = field(repr=False, compare=False)

    @property
    def valences(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.edge_classes)

    @property
    def num_edges(self) -> int:
        return len(self.edge_classes)

    @property
    def num_vertices(self) -> int:
        return len(self.vertex_classes)


@dataclass(frozen=True)
class LinkInfo:
    vertex_class: int
    euler_characteristic: int
    boundary_components: int
    orientable: bool
    betti: tuple[int, int, int]
    counts: tuple[int, int, int]

    @property
    def betti1(self) -> int:
        return self.betti[1]

    @property
    def kind(self) -> str:
        closed = self.boundary_components == 0
        if closed and self.orientable:
            genus = (2 - self.euler_characteristic) // 2
            return {0: "sphere", 1: "torus"}.get(genus, f"genus-{genus}")
        if closed:
            return "klein-bottle" if self.euler_characteristic == 0 else "non-orientable"
        if self.euler_characteristic == 1 and self.boundary_components == 1 and self.orientable:
            return "disk"
        if self.euler_characteristic == 0 and self.boundary_components == 2 and self.orientable:
            return "annulus"
        return "surface-with-boundary"


@dataclass(frozen=True)
class HomologyReport:
    rank: int
    torsion: tuple[int, ...]

    @property
    def is_admissible_topology(self) -> bool:
        return self.rank == 0 and not self.torsion


@dataclass(frozen=True)
class Triangulation:
    """Ordered tetrahedra with order-preserving face gluings.

    ``gluings`` is kept in canonical form: each pair sorted, pairs sorted.
    ``gamma`` holds edge class ids.  ``angles`` optionally carries a shape
    triple per tetrahedron (units of pi) as read from a file.
    """

    signs: tuple[int, ...]
    gluings: tuple[tuple[FaceSlot, FaceSlot], ...]
    gamma: frozenset = frozenset()
    angles: tuple | None = None

    @property
    def tets(self) -> tuple[Tetrahedron, ...]:
        return tuple(Tetrahedron(i, s) for i, s in enumerate(self.signs))

    @property
    def n(self) -> int:
        return len(self.signs)

    @cached_property
    def partner(self) -> dict[FaceSlot, FaceSlot]:
        out = {}
        for a, b in self.gluings:
            out[a] = b
            out[b] = a
        return out

    @property
    def boundary(self) -> tuple[FaceSlot, ...]:
        p = self.partner
        return tuple(FaceSlot(t, f) for t in range(self.n) for f in range(4)
                     if FaceSlot(t, f) not in p)

    @property
    def is_closed(self) -> bool:
        return len(self.gluings) * 2 == 4 * self.n

    @cached_property
    def cells(self) -> CellClasses:
        return cell_classes(self)

    def edge_class(self, tet: int, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        return self.cells.edge_of[(tet, a, b)]

    def internal_edges(self) -> tuple[int, ...]:
        """Edge classes not lying on any boundary face."""
        on_boundary = set()
        for t, f in self.boundary:
            for a, b in itertools.combinations(face_vertices(f), 2):
                on_boundary.add(self.edge_class(t, a, b))
        return tuple(e for e in range(self.cells.num_edges) if e not in on_boundary)

    def with_angles(self, angles) -> "Triangulation":
        if angles is not None:
            angles = tuple(tuple(_exact_angle(x) for x in a) for a in angles)
        return Triangulation(self.signs, self.gluings, self.gamma, angles)

    def relabel(self, perm: Sequence[int]) -> "Triangulation":
        """Rename tetrahedron ``i`` to ``perm[i]`` (gamma is dropped)."""
        inv = {p: i for i, p in enumerate(perm)}
        signs = [self.signs[inv[j]] for j in range(self.n)]
        glue = [((perm[a.tet], a.face), (perm[b.tet], b.face)) for a, b in self.gluings]
        angles = None
        if self.angles is not None:
            angles = [self.angles[inv[j]] for j in range(self.n)]
        return build_triangulation(signs, glue, angles=angles)


def _exact_angle(x) -> Fraction:
    # floats are taken at their shortest decimal representation
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def build_triangulation(signs: Sequence[int], gluings: Iterable, gamma: Iterable[int] = (),
                        angles=None) -> Triangulation:
    signs = tuple(int(s) for s in signs)
    for i, s in enumerate(signs):
        Tetrahedron(i, s)
    n = len(signs)
    seen: set[FaceSlot] = set()
    pairs = []
    for g in gluings:
        if len(g) == 4:
            a, b = FaceSlot(g[0], g[1]), FaceSlot(g[2], g[3])
        else:
            a, b = FaceSlot(*g[0]), FaceSlot(*g[1])
        for s in (a, b):
            if not (0 <= s.tet < n) or not (0 <= s.face < 4):
                raise InvalidIndex(f"face slot {tuple(s)} out of range for {n} tetrahedra")
        if a == b:
            raise SelfPairedFace(f"face slot {tuple(a)} glued to itself")
        for s in (a, b):
            if s in seen:
                raise DuplicateSlot(f"face slot {tuple(s)} appears in more than one gluing")
            seen.add(s)
        pairs.append(tuple(sorted((a, b))))
    if angles is not None:
        angles = tuple(tuple(_exact_angle(x) for x in a) for a in angles)
        if len(angles) != n:
            raise InvalidIndex(f"{len(angles)} angle triples for {n} tetrahedra")
    tri = Triangulation(signs, tuple(sorted(pairs)), frozenset(), angles)
    gamma = frozenset(int(e) for e in gamma)
    if gamma:
        ne = tri.cells.num_edges
        bad = [e for e in gamma if not 0 <= e < ne]
        if bad:
            raise InvalidIndex(f"gamma edge ids {sorted(bad)} out of range (0..{ne - 1})")
        tri = Triangulation(signs, tri.gluings, gamma, angles)
    return tri


def cell_classes(tri: Triangulation) -> CellClasses:
    uf = _UnionFind()
    for a, b in tri.gluings:
        m = face_map(a.face, b.face)
        fa = face_vertices(a.face)
        for v in fa:
            uf.union(("v", a.tet, v), ("v", b.tet, m[v]))
        for x, y in itertools.combinations(fa, 2):
            uf.union(("e", a.tet, x, y), ("e", b.tet, m[x], m[y]))
    edges = uf.groups(("e", t, x, y) for t in range(tri.n) for x, y in EDGES)
    verts = uf.groups(("v", t, v) for t in range(tri.n) for v in range(4))
    edge_classes = tuple(tuple(e[1:] for e in g) for g in edges)
    vertex_classes = tuple(tuple(v[1:] for v in g) for g in verts)
    edge_of = {m: i for i, g in enumerate(edge_classes) for m in g}
    vertex_of = {m: i for i, g in enumerate(vertex_classes) for m in g}
    return CellClasses(edge_classes, vertex_classes, edge_of, vertex_of)


def boundary_split(tri: Triangulation) -> tuple[tuple[FaceSlot, ...], tuple[FaceSlot, ...]]:
    plus, minus = [], []
    for s in tri.boundary:
        (plus if face_sign(tri.signs[s.tet], s.face) > 0 else minus).append(s)
    return tuple(plus), tuple(minus)


def _betti_numbers(n0: int, n1: int, n2: int, d1, d2) -> tuple[int, int, int]:
    r1 = exact.rank(d1) if d1 and n1 else 0
    r2 = exact.rank(d2) if d2 and n2 else 0
    return n0 - r1, n1 - r1 - r2, n2 - r2


def vertex_links(tri: Triangulation) -> tuple[LinkInfo, ...]:
    """Link surfaces of the vertex classes, built from corner triangles."""
    partner = tri.partner
    cells = tri.cells

    # link vertices (t, v, w): point of corner v on edge vw
    uf_p = _UnionFind()
    uf_s = _UnionFind()
    for a, b in tri.gluings:
        m = face_map(a.face, b.face)
        fa = face_vertices(a.face)
        for v in fa:
            for w in fa:
                if w != v:
                    uf_p.union((a.tet, v, w), (b.tet, m[v], m[w]))
            uf_s.union((a.tet, v, a.face), (b.tet, m[v], b.face))

    def side_ends(t, v, f):
        w1, w2 = (w for w in range(4) if w not in (v, f))
        return (t, v, w1), (t, v, w2)

    out = []
    for k, corners in enumerate(cells.vertex_classes):
        tris = list(corners)
        sides = sorted({uf_s.find((t, v, f)) for t, v in tris for f in range(4) if f != v})
        pts = sorted({uf_p.find((t, v, w)) for t, v in tris for w in range(4) if w != v})
        sid = {s: i for i, s in enumerate(sides)}
        pid = {p: i for i, p in enumerate(pts)}

        # boundary matrices of the link complex
        d1 = [[0] * len(sides) for _ in pts]
        for s in sides:
            p, q = side_ends(*s)
            d1[pid[uf_p.find(p)]][sid[s]] += -1
            d1[pid[uf_p.find(q)]][sid[s]] += 1
        d2 = [[0] * len(tris) for _ in sides]
        coeff = {}
        for j, (t, v) in enumerate(tris):
            others = [w for w in range(4) if w != v]
            for pos, f in enumerate(others):
                c = (-1) ** pos  # side opposite the pos-th vertex of the corner
                d2[sid[uf_s.find((t, v, f))]][j] += c
                coeff[(t, v, f)] = c
        betti = _betti_numbers(len(pts), len(sides), len(tris), d1, d2)
        chi = len(pts) - len(sides) + len(tris)

        # every link vertex must have a connected star
        star = defaultdict(_UnionFind)
        for t, v in tris:
            for w in range(4):
                if w == v:
                    continue
                star[uf_p.find((t, v, w))].find((t, v))
        for t, v in tris:
            for f in range(4):
                if f == v:
                    continue
                slot = FaceSlot(t, f)
                if slot not in partner:
                    continue
                o = partner[slot]
                m = face_map(f, o.face)
                for w in range(4):
                    if w in (v, f):
                        continue
                    star[uf_p.find((t, v, w))].union((t, v), (o.tet, m[v]))
        for p, u in star.items():
            members = [c for c in u.parent]
            if len({u.find(c) for c in members}) != 1:
                raise NonManifoldLink(f"vertex class {k}: link is pinched at a point")

        # orientability by propagation across glued sides
        orient = {tris[0]: 1}
        queue = [tris[0]]
        orientable = True
        while queue:
            t, v = queue.pop()
            for f in range(4):
                if f == v:
                    continue
                slot = FaceSlot(t, f)
                if slot not in partner:
                    continue
                o = partner[slot]
                nv = face_map(f, o.face)[v]
                want = -orient[(t, v)] * coeff[(t, v, f)] * coeff[(o.tet, nv, o.face)]
                if (o.tet, nv) == (t, v) and o.face == f:
                    continue
                if (o.tet, nv) in orient:
                    if orient[(o.tet, nv)] != want:
                        orientable = False
                else:
                    orient[(o.tet, nv)] = want
                    queue.append((o.tet, nv))

        # boundary circles
        bsides = [s for s in sides if FaceSlot(s[0], s[2]) not in partner]
        buf = _UnionFind()
        for s in bsides:
            p, q = side_ends(*s)
            buf.union(uf_p.find(p), uf_p.find(q))
        nbd = len({buf.find(uf_p.find(side_ends(*s)[0])) for s in bsides})
        out.append(LinkInfo(k, chi, nbd, orientable, betti,
                            (len(pts), len(sides), len(tris))))
    return tuple(out)


# ---------------------------------------------------------------------------
# truncated complex


def truncated_chain_complex(tri: Triangulation):
    """Cellular chain complex of the tetrahedra with all corners cut off.

    Returns ``(cells, d1, d2, d3)`` where ``cells[k]`` lists the k-cell keys
    and ``dk`` is the integer boundary matrix as a list of rows indexed by
    (k-1)-cells.
    """
    n = tri.n

    def P(t, a, b):
        return ("P", t, a, b)

    def L(t, a, b):
        return ("L", t, min(a, b), max(a, b))

    def S(t, v, a, b):
        return ("S", t, v, min(a, b), max(a, b))

    def H(t, f):
        return ("H", t, f)

    def C(t, v):
        return ("C", t, v)

    bd = {}
    for t in range(n):
        for a, b in EDGES:
            bd[L(t, a, b)] = {P(t, b, a): 1, P(t, a, b): -1}
        for v in range(4):
            o = [w for w in range(4) if w != v]
            for a, b in itertools.combinations(o, 2):
                bd[S(t, v, a, b)] = {P(t, v, b): 1, P(t, v, a): -1}
            a, b, c = o
            bd[C(t, v)] = {S(t, v, b, c): 1, S(t, v, a, c): -1, S(t, v, a, b): 1}
        for f in range(4):
            a, b, c = face_vertices(f)
            bd[H(t, f)] = {L(t, a, b): 1, S(t, b, a, c): 1, L(t, b, c): 1,
                           S(t, c, a, b): -1, L(t, a, c): -1, S(t, a, b, c): -1}
        top = {}
        for i in range(4):
            top[H(t, i)] = (-1) ** i
        for v in range(4):
            top[C(t, v)] = (-1) ** (v + 1)
        bd[("T", t)] = top

    uf = _UnionFind()
    for x, y in tri.gluings:
        m = face_map(x.face, y.face)
        fv = face_vertices(x.face)
        uf.union(H(x.tet, x.face), H(y.tet, y.face))
        for a, b in itertools.combinations(fv, 2):
            uf.union(L(x.tet, a, b), L(y.tet, m[a], m[b]))
        for v in fv:
            for w in fv:
                if w != v:
                    uf.union(P(x.tet, v, w), P(y.tet, m[v], m[w]))
            a, b = (w for w in fv if w != v)
            uf.union(S(x.tet, v, a, b), S(y.tet, m[v], m[a], m[b]))

    dims = {"P": 0, "L": 1, "S": 1, "H": 2, "C": 2, "T": 3}
    all_cells = set(bd)
    for d in list(bd.values()):
        all_cells.update(d)
    reps = [sorted({uf.find(c) for c in all_cells if dims[c[0]] == k}) for k in range(4)]
    index = [{c: i for i, c in enumerate(r)} for r in reps]

    mats = []
    for k in (1, 2, 3):
        M = [[0] * len(reps[k]) for _ in reps[k - 1]]
        done = set()
        for c in all_cells:
            if dims[c[0]] != k:
                continue
            r = uf.find(c)
            if r in done:
                continue
            done.add(r)
            j = index[k][r]
            for face, coef in bd[c].items():
                M[index[k - 1][uf.find(face)]][j] += coef
        mats.append(M)
    return reps, mats[0], mats[1], mats[2]


def _elementary_divisors(M) -> tuple[int, ...]:
    from sympy import Matrix, ZZ
    from sympy.matrices.normalforms import invariant_factors

    if not M or not M[0]:
        return ()
    return tuple(int(abs(d)) for d in invariant_factors(Matrix(M), domain=ZZ) if d != 0)


def homology_h2_truncated(tri: Triangulation) -> HomologyReport:
    cells, d1, d2, d3 = truncated_chain_complex(tri)
    n2 = len(cells[2])
    r2 = exact.rank(d2) if n2 else 0
    r3 = exact.rank(d3) if cells[3] else 0
    torsion = tuple(d for d in _elementary_divisors(d3) if d > 1)
    return HomologyReport(n2 - r2 - r3, torsion)


def single_tetrahedron(sign: int = 1) -> Triangulation:
    return build_triangulation([sign], [])
