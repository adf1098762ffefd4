"""Acceptance criteria 1-8.

Each criterion prints one line ``criterion N: PASS|FAIL  <details>``.  Run
with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy

sys.path.insert(0, str(Path(__file__).parent))

from teichtqft import angles as ang  # noqa: E402
from teichtqft import build_triangulation, pachner, state, wgz  # noqa: E402
from teichtqft.errors import NotAdmissible, TqftError  # noqa: E402
from teichtqft.mesh import homology_h2_truncated, vertex_links  # noqa: E402
from teichtqft.qdilog import QDilogParams, log_phi_exchanged, phi  # noqa: E402

from conftest import corpus  # noqa: E402
from oracles import closed_gluings, lobachevsky_reference  # noqa: E402
from test_pachner import _p32_oracle, _random_site_shape  # noqa: E402

A52 = (0.15, 0.23, 0.16)
B52 = (0.27, 0.10, 0.18)
C52 = (0.08, 0.17, 0.16)
THIRD = (Fraction(1, 3),) * 3


def criterion_1():
    t0 = time.time()
    worst_fe = 0.0
    for b in (1.0, 1.2):
        p = QDilogParams(b)
        xs = np.linspace(-2, 2, 9)
        ys = np.linspace(-0.4 * p.h, 0.4 * p.h, 5)
        z = (xs[:, None] + 1j * ys[None, :]).ravel()
        for s in (b, 1 / b):
            lo, hi = phi(z - 0.5j * s, p), phi(z + 0.5j * s, p)
            worst_fe = max(worst_fe, float(np.max(np.abs(lo - (1 + np.exp(2 * np.pi * s * z)) * hi)
                                                  / np.abs(lo))))
    x = np.linspace(-5, 5, 201)
    unit = max(float(np.max(np.abs(np.abs(phi(x, b)) - 1))) for b in (1.0, 1.2))
    zz = (np.linspace(-2, 2, 9)[:, None] + 1j * np.linspace(-0.44, 0.44, 5)[None, :]).ravel()
    sym = float(np.max(np.abs(phi(zz, 1.7) - np.exp(log_phi_exchanged(zz, 1 / 1.7)))))
    dt = time.time() - t0
    ok = worst_fe <= 1e-10 and unit <= 1e-10 and sym <= 1e-11 and dt < 10
    return ok, f"functional eq {worst_fe:.1e}, unitarity {unit:.1e}, b<->1/b {sym:.1e}, {dt:.1f}s"


def criterion_2():
    t0 = time.time()
    p = QDilogParams.from_hbar(0.25)
    direct = state.partition_function(corpus("five2"), state.five2_shape(A52, B52, C52), p).value
    red = state.z52_reduced(A52, B52, C52, p).value
    rel = abs(direct - red) / abs(red)
    rel_abs = abs(abs(direct) - abs(red)) / abs(red)
    level = -2 * (1 - 2 * A52[2]) ** 2 + 4 * (A52[0] - C52[1]) * (C52[0] - B52[1])
    rel_lvl = abs(state.apply_level(direct, level, p.hbar) - red) / abs(red)
    dt = time.time() - t0
    ok = rel <= 1e-3 and dt <= 600
    return ok, (f"|Zd-Zr|/|Zr| = {rel:.3e}; moduli differ by {rel_abs:.1e}; after level "
                f"{level:.4f} they differ by {rel_lvl:.1e}; {dt:.0f}s")


def criterion_3():
    t0 = time.time()
    target41 = 6 * lobachevsky_reference(math.pi / 3)
    target52 = ang.maximize_volume(corpus("five2")).volume
    fits = {}
    for kind in ("chi41", "chi52"):
        rows = state.sweep(kind)
        fits[kind] = state.fit_volume_rate([(r.hbar, abs(r.value)) for r in rows])
    d41 = abs(fits["chi41"].volume - target41) / target41
    d52 = abs(fits["chi52"].volume - target52) / target52
    dt = time.time() - t0
    ok = d41 <= 0.02 and d52 <= 0.02 and dt <= 900
    return ok, (f"4_1 V={fits['chi41'].volume:.5f} vs {target41:.7f} ({100 * d41:.2f}%), "
                f"5_2 V={fits['chi52'].volume:.5f} vs {target52:.7f} ({100 * d52:.2f}%), "
                f"drop shifts {100 * fits['chi41'].drop_shift:.2f}%/{100 * fits['chi52'].drop_shift:.2f}%, "
                f"{dt:.0f}s")


def criterion_4():
    # 1000 random sites on the bipyramid made from two tetrahedra
    pair = build_triangulation([1, 1], [(0, 0, 1, 3)])
    bp = pachner.apply_23(pair, ang.ShapeAssignment([THIRD] * 2), 0, 0)
    tri, e = bp.tri, bp.added_edges[0]
    rng = random.Random(1000)
    bad = 0
    for _ in range(1000):
        sh = _random_site_shape(tri, e, rng)
        site, = pachner.find_32_sites(tri, sh)
        res = pachner.apply_32(tri, sh, site)
        t4, t5 = _p32_oracle(*site.angles)
        new = [x for t in res.new_tets for x in res.shape.angles[t]]
        if (sum(t4) != 1 or sum(t5) != 1 or min(new) <= 0
                or sorted(new) != sorted(t4 + t5)
                or not pachner.weights_preserved(tri, sh, res)):
            bad += 1
    # round trip returns to the same weight fiber
    sh = _random_site_shape(tri, e, rng)
    down = pachner.apply_32(tri, sh, e)
    t4, t5 = down.new_tets
    face = next(f for f in range(4)
                if (q := down.tri.partner.get((t4, f))) is not None and q.tet == t5)
    up = pachner.apply_23(down.tri, down.shape, t4, face)
    w0, w2 = ang.edge_weights(tri, sh), ang.edge_weights(up.tri, up.shape)
    fiber = all(w2[up.edge_map[down.edge_map[k]]] == w0[k] for k in down.edge_map)
    fiber = fiber and w2[up.added_edges[0]] == w0[e]
    # |Z| before and after one 2-3 move on the figure-eight complex
    fig8 = corpus("fig8")
    p = QDilogParams.from_hbar(0.25)
    shape = ang.rational_shape(fig8)
    z2 = state.partition_function(fig8, shape, p).value
    moved = pachner.apply_23(fig8, shape, 0, 0)
    z3 = state.partition_function(moved.tri, moved.shape, p).value
    rel = abs(abs(z3) - abs(z2)) / abs(z2)
    ok = bad == 0 and fiber and rel <= 1e-3
    return ok, f"{bad} bad of 1000 sites, round trip in fiber: {fiber}, |Z| 2 vs 3 tets {rel:.1e}"


def criterion_5():
    notes = []
    ok = True
    for name in ("trefoil", "fig8", "five2"):
        tri = corpus(name)
        h = homology_h2_truncated(tri)
        kinds = {link.kind for link in vertex_links(tri)}
        good = h.rank == 0 and not h.torsion and kinds == {"torus"}
        ok &= good
        notes.append(f"{name} H2=0 torus {good}")
    dims = (ang.balanced_space_dim(corpus("fig8")), ang.balanced_space_dim(corpus("five2")))
    ok &= dims == (3, 4)
    found = None
    for signs, glue in closed_gluings(1):
        try:
            cand = build_triangulation(signs, glue)
        except TqftError:
            continue
        if homology_h2_truncated(cand).rank:
            found = cand
            break
    rejected = found is not None and not homology_h2_truncated(found).is_admissible_topology
    # a search-found three-cusped complex carries a positive balanced shape, so
    # only the homology test stands between it and evaluation
    multi = build_triangulation([1, -1, 1, 1],
                                [(2, 1, 1, 0), (1, 3, 3, 0), (0, 0, 2, 3), (0, 2, 3, 2),
                                 (0, 3, 3, 1), (3, 3, 0, 1), (2, 0, 1, 2), (1, 1, 2, 2)])
    try:
        state.assemble(multi, ang.rational_shape(multi), 1.0)
        rejected = False
    except NotAdmissible:
        pass
    ok &= rejected
    return ok, f"{', '.join(notes)}; balanced dims {dims}; H2 != 0 rejected: {rejected}"


def criterion_6():
    five2 = corpus("five2")
    a = sympy.symbols("a1:4")
    b = sympy.symbols("b1:4")
    c = sympy.symbols("c1:4")
    sh = ang.ShapeAssignment([(2 * a[i], 2 * b[i], 2 * c[i]) for i in range(3)])
    sub = {c[i]: sympy.Rational(1, 2) - a[i] - b[i] for i in range(3)}
    eqs = [sympy.expand((w - 2).subs(sub)) for w in ang.edge_weights(five2, sh)]
    stated = [sympy.expand((2 * a[2] - a[0] - c[1]).subs(sub)),
              sympy.expand((b[2] - c[0] - b[1]).subs(sub))]
    cols = list(a + b)

    def mat(rows):
        return sympy.Matrix([[r.coeff(v) for v in cols] + [r.subs({v: 0 for v in cols})] for r in rows])

    r_eq, r_st, r_all = mat(eqs).rank(), mat(stated).rank(), mat(eqs + stated).rank()
    ok = r_eq == r_st == r_all == 2
    return ok, f"rank(edge eqs)={r_eq}, rank(stated)={r_st}, rank(both)={r_all}"


def criterion_7():
    rng = np.random.default_rng(7)
    S = rng.random((20, 2))
    xs = np.array([-1.3, 0.0, 0.7])
    rt = mp = 0.0
    for mu in (-1.0, 0.0, 1.0):
        f = lambda t, mu=mu: np.exp(-np.pi * (np.asarray(t, float) - mu) ** 2)  # noqa: E731
        W = wgz.wgz_forward(f)
        rt = max(rt, float(np.max(np.abs(wgz.wgz_inverse(W, xs) - f(xs)))))
        back = wgz.wgz_forward(lambda t: wgz.wgz_inverse(W, t))
        rt = max(rt, float(np.max(np.abs(back.raw(S[:, 0], S[:, 1]) - W.raw(S[:, 0], S[:, 1])))))
        mp = max(mp, max(wgz.multiplier_check(W, (m, n), S) for m in range(-2, 3) for n in range(-2, 3)))
    p = wgz.PsiParams(0.125, 0.125, 1.0)
    g16, g24 = wgz.g_section(p, 16), wgz.g_section(p, 24)
    tr = float(np.max(np.abs(g16.raw(S[:8, 0], S[:8, 1]) - g24.raw(S[:8, 0], S[:8, 1]))))
    ok = rt <= 1e-10 and mp <= 1e-10 and tr <= 1e-8
    return ok, f"round trip {rt:.1e}, multiplier {mp:.1e}, g M=16 vs 24 {tr:.1e}"


def criterion_8():
    kkt = []
    for name in ("fig8", "five2"):
        kkt.append(ang.maximize_volume(corpus(name)).kkt_residual)
    x = np.array(ang.solve_shape(corpus("five2")).flat(), float)
    g = ang.volume_gradient(x)
    h = 1e-6
    fd_err = 0.0
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        fd = (np.sum(ang.lobachevsky(np.pi * (x + e))) - np.sum(ang.lobachevsky(np.pi * (x - e)))) / (2 * h)
        fd_err = max(fd_err, abs(fd - g[i]))
    res = ang.maximize_volume(corpus("fig8"))
    reg = float(np.max(np.abs(res.shape.array() - 1 / 3)))
    ok = max(kkt) <= 1e-8 and fd_err <= 1e-6 and reg <= 1e-8
    return ok, f"KKT {max(kkt):.1e}, gradient vs differences {fd_err:.1e}, 4_1 argmax off regular by {reg:.1e}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


def _report(n, fn):
    ok, detail = fn()
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok, line


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, capsys):
    ok, line = _report(n, CRITERIA[n - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        ok, line = _report(i, fn)
        print(line, flush=True)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
