"""Shaped 3-2 and 2-3 moves.

Both moves act on a bipyramid with apexes ``p``, ``q`` and equator
``x, y, z``.  Three tetrahedra ``{p, q, X, Y}`` around the edge ``pq`` are
traded for the two tetrahedra ``{p, x, y, z}`` and ``{q, x, y, z}``.  The new
vertex orders are the unique ones that keep the orders on the six boundary
triangles, and the angle at a new edge ``pX`` (or ``qX``) is the sum of the
angles at ``pX`` (``qX``) in the two old tetrahedra containing ``X``, which
preserves every surviving edge weight.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .angles import ANGLE_SLOT, ShapeAssignment, edge_weights
from .errors import InfeasiblePositivity, InvalidSite
from .mesh import EDGES, FaceSlot, Triangulation, build_triangulation, face_map, face_vertices


@dataclass(frozen=True)
class MoveSite32:
    edge: int
    tets: tuple[int, int, int]
    angles: tuple[tuple, tuple, tuple]  # (alpha_i, beta_i, gamma_i), alpha_i at the edge


@dataclass(frozen=True)
class MoveResult:
    tri: Triangulation
    shape: ShapeAssignment
    new_tets: tuple[int, ...]
    edge_map: dict            # old edge class -> new edge class (surviving edges)
    removed_edges: tuple[int, ...]
    added_edges: tuple[int, ...]
    angle_map: dict

    def diff(self) -> dict:
        return {"removed_edges": list(self.removed_edges), "added_edges": list(self.added_edges),
                "angle_map": {k: [str(x) for x in v] for k, v in self.angle_map.items()}}


def _angle(shape: ShapeAssignment, t: int, i: int, j: int):
    return shape.angles[t][ANGLE_SLOT[(min(i, j), max(i, j))]]


def _linear_order(chains: Sequence[Sequence], items: Sequence, priority: Sequence) -> list:
    """Linear extension of the union of chains; InvalidSite on a cycle."""
    succ = {x: set() for x in items}
    indeg = {x: 0 for x in items}
    for ch in chains:
        for a, b in zip(ch, ch[1:]):
            if b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    rank = {x: i for i, x in enumerate(priority)}
    out = []
    ready = sorted((x for x in items if indeg[x] == 0), key=rank.get)
    while ready:
        x = ready.pop(0)
        out.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                ready.append(y)
        ready.sort(key=rank.get)
    if len(out) != len(items):
        raise InvalidSite("vertex orders around the site are cyclic; no ordered rebuild exists")
    return out


def _sign_of(coords: dict, verts: Sequence) -> int:
    v = [np.array(coords[x], float) for x in verts]
    d = np.linalg.det(np.array([v[1] - v[0], v[2] - v[0], v[3] - v[0]]))
    return 1 if d > 0 else -1


def _embedding(p, q, eq, flip: bool) -> dict:
    s = -1.0 if flip else 1.0
    c = {p: (0.0, 0.0, s), q: (0.0, 0.0, -s)}
    for k, x in enumerate(eq):
        ang = 2 * np.pi * k / 3
        c[x] = (np.cos(ang), np.sin(ang), 0.0)
    return c


def _orient(p, q, eq, old: Sequence[tuple[Sequence, int]]) -> dict:
    """Embedding of the bipyramid reproducing the signs of the old tetrahedra."""
    for flip in (False, True):
        c = _embedding(p, q, eq, flip)
        if all(_sign_of(c, verts) == s for verts, s in old):
            return c
    raise InvalidSite("tetrahedra around the site are not coherently oriented")


def _rebuild(tri: Triangulation, shape: ShapeAssignment, removed: Sequence[int],
             new_tets: Sequence[tuple[list, int, tuple]], local: dict,
             external: dict, internal_pairs: Sequence[tuple[tuple, tuple]]):
    """Assemble the new triangulation.

    ``new_tets`` holds (ordered vertex classes, sign, angle triple);
    ``local`` maps (old tet, vertex) to its class; ``external`` maps old
    boundary slots of the removed tetrahedra to (new index, face);
    ``internal_pairs`` are gluings among the new tetrahedra.
    """
    keep = [t for t in range(tri.n) if t not in removed]
    renum = {t: i for i, t in enumerate(keep)}
    base = len(keep)
    signs = [tri.signs[t] for t in keep] + [s for _, s, _ in new_tets]
    angles = [shape.angles[t] for t in keep] + [a for _, _, a in new_tets]

    def new_slot(slot):
        if slot.tet in renum:
            return (renum[slot.tet], slot.face)
        if slot in external:
            k, f = external[slot]
            return (base + k, f)
        return None

    glue = []
    for a, b in tri.gluings:
        na, nb = new_slot(a), new_slot(b)
        if na is None and nb is None:
            continue  # interior face of the old bipyramid
        if na is None or nb is None:
            raise InvalidSite("bipyramid interior face glued outside the site")
        glue.append((na, nb))
    for (k1, f1), (k2, f2) in internal_pairs:
        glue.append(((base + k1, f1), (base + k2, f2)))
    new = build_triangulation(signs, glue, angles=None)

    # edge correspondence through any member of each old class
    pos = [{c: i for i, c in enumerate(verts)} for verts, _, _ in new_tets]

    def image(t, i, j):
        if t in renum:
            return new.edge_class(renum[t], i, j)
        ci, cj = local[(t, i)], local[(t, j)]
        for k, pk in enumerate(pos):
            if ci in pk and cj in pk:
                return new.edge_class(base + k, pk[ci], pk[cj])
        return None

    edge_map = {}
    removed_edges = []
    for e, members in enumerate(tri.cells.edge_classes):
        imgs = {image(*m) for m in members}
        imgs.discard(None)
        if not imgs:
            removed_edges.append(e)
            continue
        if len(imgs) != 1:
            raise InvalidSite(f"edge {e} splits under the move")
        edge_map[e] = imgs.pop()
    added = tuple(sorted(set(range(new.cells.num_edges)) - set(edge_map.values())))
    gamma = {edge_map[g] for g in tri.gamma if g in edge_map}
    if gamma:
        new = build_triangulation(new.signs, new.gluings, gamma)
    return new, ShapeAssignment(angles, shape.level), tuple(range(base, base + len(new_tets))), \
        edge_map, tuple(removed_edges), added


def _angle_triple(verts: list, edge_angle) -> tuple:
    trip = [None, None, None]
    for i, j in EDGES:
        val = edge_angle(verts[i], verts[j])
        k = ANGLE_SLOT[(i, j)]
        if trip[k] is None:
            trip[k] = val
    return tuple(trip)


# ---------------------------------------------------------------------------
# 3-2


@dataclass(frozen=True)
class _Bipyramid:
    tets: tuple[int, int, int]       # t_i contains the equator vertices E_i, E_{i+1}
    local: dict
    p: object
    q: object
    eq: tuple                       # E_1, E_2, E_3, counter-clockwise seen from p
    inner: frozenset
    ends: dict
    coords: dict


def _bipyramid(tri: Triangulation, e: int) -> _Bipyramid:
    members = tri.cells.edge_classes[e]
    tets = [m[0] for m in members]
    if len(members) != 3 or len(set(tets)) != 3:
        raise InvalidSite(f"edge {e} does not have three distinct incident tetrahedra")
    ends = {t: (a, b) for t, a, b in members}
    from .mesh import _UnionFind
    uf = _UnionFind()
    for t in tets:
        for v in range(4):
            uf.find((t, v))
    inner = set()
    for t in tets:
        for f in range(4):
            if f in ends[t]:
                continue
            slot = FaceSlot(t, f)
            o = tri.partner.get(slot)
            if o is None or o.tet not in tets or o.face in ends[o.tet]:
                raise InvalidSite("faces around the edge are not glued into a bipyramid")
            inner.add(slot)
            m = face_map(f, o.face)
            for v in face_vertices(f):
                uf.union((t, v), (o.tet, m[v]))
    local = {(t, v): uf.find((t, v)) for t in tets for v in range(4)}
    t1 = min(tets)
    p, q = local[(t1, ends[t1][0])], local[(t1, ends[t1][1])]
    if p == q:
        raise InvalidSite("both ends of the edge coincide locally")
    eq = sorted({local[(t, v)] for t in tets for v in range(4)} - {p, q})
    if len(eq) != 3:
        raise InvalidSite("the site is not a bipyramid with three equatorial vertices")
    for t in tets:
        if {local[(t, v)] for v in ends[t]} != {p, q}:
            raise InvalidSite("edge endpoints are not matched consistently")
    coords = _orient(p, q, eq, [([local[(t, v)] for v in range(4)], tri.signs[t]) for t in tets])
    # counter-clockwise as seen from p: reverse when p sits below the equator
    ring = list(eq) if coords[p][2] > 0 else list(reversed(eq))
    on = {t: {local[(t, v)] for v in range(4)} - {p, q} for t in tets}
    start = next(k for k in range(3) if on[t1] == {ring[k], ring[(k + 1) % 3]})
    ring = ring[start:] + ring[:start]
    order = [next(t for t in tets if on[t] == {ring[k], ring[(k + 1) % 3]}) for k in range(3)]
    return _Bipyramid(tuple(order), local, p, q, tuple(ring), frozenset(inner), ends, coords)


def _labelled(tri: Triangulation, shape: ShapeAssignment, bp: _Bipyramid) -> tuple:
    """(alpha_i, beta_i, gamma_i): angles at pq, (p, E_i) and (p, E_{i+1}) in t_i."""
    out = []
    for k, t in enumerate(bp.tets):
        inv = {bp.local[(t, v)]: v for v in range(4)}
        P, Q = inv[bp.p], inv[bp.q]
        Ei, Ej = inv[bp.eq[k]], inv[bp.eq[(k + 1) % 3]]
        out.append((_angle(shape, t, P, Q), _angle(shape, t, P, Ei), _angle(shape, t, P, Ej)))
    return tuple(out)


def find_32_sites(tri: Triangulation, shape: ShapeAssignment, tol: float = 1e-9) -> list[MoveSite32]:
    internal = set(tri.internal_edges())
    out = []
    for e, members in enumerate(tri.cells.edge_classes):
        if len(members) != 3 or e in tri.gamma or e not in internal:
            continue
        try:
            bp = _bipyramid(tri, e)
        except InvalidSite:
            continue
        trip = _labelled(tri, shape, bp)
        if abs(float(sum(x[0] for x in trip)) - 2) > tol:
            continue
        out.append(MoveSite32(e, bp.tets, trip))
    return out


def apply_32(tri: Triangulation, shape: ShapeAssignment, site: MoveSite32 | int) -> MoveResult:
    e = site.edge if isinstance(site, MoveSite32) else int(site)
    if not 0 <= e < tri.cells.num_edges:
        raise InvalidSite(f"no edge {e}")
    bp = _bipyramid(tri, e)
    valid = {s.edge: s for s in find_32_sites(tri, shape)}
    if e not in valid:
        raise InvalidSite(f"edge {e} is not a balanced valence-3 site outside gamma")
    tets, local, p, q, ring = bp.tets, bp.local, bp.p, bp.q, bp.eq

    chains = []
    for t in tets:
        for f in bp.ends[t]:
            chains.append([local[(t, v)] for v in face_vertices(f)])
    order = _linear_order(chains, [p, q] + sorted(ring), [p, q] + sorted(ring))
    v4 = [c for c in order if c != q]
    v5 = [c for c in order if c != p]
    s4, s5 = _sign_of(bp.coords, v4), _sign_of(bp.coords, v5)

    t4, t5 = p32_angles(*valid[e].angles)
    # t4 carries the angles at (p, E_2), (p, E_1), (p, E_3); t5 the same at q
    at_p = {ring[1]: t4[0], ring[0]: t4[1], ring[2]: t4[2]}
    at_q = {ring[1]: t5[0], ring[0]: t5[1], ring[2]: t5[2]}

    def edge_angle(apex, table):
        def f(c1, c2):
            if apex in (c1, c2):
                return table[c2 if c1 == apex else c1]
            # an equatorial edge is opposite the apex edge to the third vertex
            return table[next(c for c in ring if c not in (c1, c2))]
        return f

    a4 = _angle_triple(v4, edge_angle(p, at_p))
    a5 = _angle_triple(v5, edge_angle(q, at_q))

    external = {}
    for t in tets:
        inv = {v: local[(t, v)] for v in range(4)}
        for f in range(4):
            slot = FaceSlot(t, f)
            if slot in bp.inner:
                continue
            face_cls = {inv[v] for v in face_vertices(f)}
            if p in face_cls:
                missing = next(c for c in v4 if c not in face_cls)
                external[slot] = (0, v4.index(missing))
            else:
                missing = next(c for c in v5 if c not in face_cls)
                external[slot] = (1, v5.index(missing))
    internal_pairs = [((0, v4.index(p)), (1, v5.index(q)))]
    new, nshape, idx, emap, removed, added = _rebuild(
        tri, shape, tets, [(v4, s4, a4), (v5, s5, a5)], local, external, internal_pairs)
    amap = {f"t{k + 1}": tuple(x) for k, x in enumerate(valid[e].angles)}
    amap.update({"t4": tuple(t4), "t5": tuple(t5)})
    return MoveResult(new, nshape, idx, emap, removed, added, amap)


def p32_angles(a1, a2, a3):
    """The closed-form angle map on labelled triples (alpha_i, beta_i, gamma_i)."""
    (_, b1, g1), (_, b2, g2), (_, b3, g3) = a1, a2, a3
    t4 = (b2 + g1, b1 + g3, b3 + g2)
    t5 = (b1 + g2, b3 + g1, b2 + g3)
    return t4, t5


# ---------------------------------------------------------------------------
# 2-3


def _rationalize(x: np.ndarray, A: np.ndarray, b: np.ndarray, max_den: int = 10 ** 6):
    fr = [Fraction(float(v)).limit_denominator(max_den) for v in x]
    for row, rhs in zip(A, b):
        lhs = sum(Fraction(int(c)) * v for c, v in zip(row, fr))
        if lhs != rhs:
            return None
    return fr


def solve_23_angles(A4: Sequence, B5: Sequence, exact_rhs=None):
    """Positive (alpha_i, u_i, v_i) reproducing apex angles A (top) and B (bottom).

    Returns a list of three triples; the max-min-slack point of the
    one-parameter family.  Raises InfeasiblePositivity with a certificate.
    """
    # variable order: alpha0..2, u0..2, v0..2
    rows, rhs = [], []
    for i in range(3):
        r = [0] * 9
        r[i] = r[3 + i] = r[6 + i] = 1
        rows.append(r)
        rhs.append(1)
    for i in range(3):
        r = [0] * 9
        r[3 + i] = 1               # u_i
        r[6 + (i - 1) % 3] = 1     # v_{i-1}
        rows.append(r)
        rhs.append(A4[i])
        r = [0] * 9
        r[6 + i] = 1               # v_i
        r[3 + (i - 1) % 3] = 1     # u_{i-1}
        rows.append(r)
        rhs.append(B5[i])
    A = np.array(rows, float)
    b = np.array([float(x) for x in rhs])
    c = np.zeros(10)
    c[-1] = -1
    A_eq = np.hstack([A, np.zeros((9, 1))])
    A_ub = np.hstack([-np.eye(9), np.ones((9, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(9), A_eq=A_eq, b_eq=b,
                  bounds=[(None, None)] * 9 + [(None, 1)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        from .angles import _motzkin_certificate
        raise InfeasiblePositivity("no positive angles solve the 2-3 equations",
                                   certificate=_motzkin_certificate(A, b))
    x = res.x[:9]
    if all(isinstance(v, (int, Fraction)) for v in list(A4) + list(B5)):
        fr = _rationalize(x, A, [Fraction(v) for v in rhs])
        if fr is not None and min(fr) > 0:
            x = fr
    return [(x[i], x[3 + i], x[6 + i]) for i in range(3)]


def apply_23(tri: Triangulation, shape: ShapeAssignment, tet: int, face: int) -> MoveResult:
    slot = FaceSlot(tet, face)
    o = tri.partner.get(slot)
    if o is None:
        raise InvalidSite(f"face {tuple(slot)} is on the boundary")
    if o.tet == tet:
        raise InvalidSite("the two sides of the face belong to the same tetrahedron")
    t4, t5 = tet, o.tet
    m = face_map(face, o.face)
    # classes: apexes and the three shared vertices, named by t4's labels
    p, q = ("p",), ("q",)
    local = {(t4, face): p, (t5, o.face): q}
    eq = []
    for v in face_vertices(face):
        c = ("x", v)
        eq.append(c)
        local[(t4, v)] = c
        local[(t5, m[v])] = c
    chains = [[local[(t4, v)] for v in range(4)], [local[(t5, v)] for v in range(4)]]
    order = _linear_order(chains, [p, q] + eq, [p, q] + eq)
    coords = _orient(p, q, eq, [([local[(t, v)] for v in range(4)], tri.signs[t]) for t in (t4, t5)])

    inv4 = {local[(t4, v)]: v for v in range(4)}
    inv5 = {local[(t5, v)]: v for v in range(4)}
    A4 = [_angle(shape, t4, inv4[p], inv4[X]) for X in eq]
    B5 = [_angle(shape, t5, inv5[q], inv5[X]) for X in eq]
    sol = solve_23_angles(A4, B5)

    new_tets = []
    for i in range(3):
        Ei, Ej = eq[i], eq[(i + 1) % 3]
        verts = [c for c in order if c in (p, q, Ei, Ej)]
        alpha, u, v = sol[i]

        def edge_angle(c1, c2, Ei=Ei, Ej=Ej, alpha=alpha, u=u, v=v):
            pair = {c1, c2}
            if pair in ({p, q}, {Ei, Ej}):
                return alpha
            if pair in ({p, Ei}, {q, Ej}):
                return u
            return v
        new_tets.append((verts, _sign_of(coords, verts), _angle_triple(verts, edge_angle)))

    external = {}
    for t, apex, inv in ((t4, p, inv4), (t5, q, inv5)):
        for f in range(4):
            s = FaceSlot(t, f)
            if s in (slot, o):
                continue
            cls = {local[(t, v)] for v in face_vertices(f)}
            k = next(i for i in range(3) if cls - {apex} == {eq[i], eq[(i + 1) % 3]})
            verts = new_tets[k][0]
            other = q if apex == p else p
            external[s] = (k, verts.index(other))
    internal_pairs = []
    for i in range(3):
        j = (i + 1) % 3
        # T_i and T_j share {p, q, E_j}
        fi = new_tets[i][0].index(eq[i])
        fj = new_tets[j][0].index(eq[(j + 1) % 3])
        internal_pairs.append(((i, fi), (j, fj)))
    new, nshape, idx, emap, removed, added = _rebuild(
        tri, shape, [t4, t5] if t4 < t5 else [t5, t4],
        new_tets, local, external, internal_pairs)
    amap = {"t4": tuple(shape.angles[t4]), "t5": tuple(shape.angles[t5])}
    amap.update({f"t{k + 1}": tuple(s) for k, s in enumerate(sol)})
    return MoveResult(new, nshape, idx, emap, removed, added, amap)


def weights_preserved(before: Triangulation, sb: ShapeAssignment, res: MoveResult) -> bool:
    wb = edge_weights(before, sb)
    wa = edge_weights(res.tri, res.shape)
    return all(wa[res.edge_map[e]] == wb[e] for e in res.edge_map)
