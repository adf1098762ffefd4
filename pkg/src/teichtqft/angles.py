"""Shape structures, edge weights, angle-structure LPs and hyperbolic volume.

Angles are stored in units of pi.  The triple ``(a1, a2, a3)`` of a
tetrahedron sits on the opposite edge pairs ``{01, 23}``, ``{02, 13}`` and
``{03, 12}`` respectively.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import bernoulli

from . import exact
from .errors import (DimensionMismatch, EmptyAffineSpace, Infeasible, NonPositiveAngles,
                     UnboundedSlack)
from .mesh import EDGES, Triangulation

ANGLE_SLOT = {(0, 1): 0, (2, 3): 0, (0, 2): 1, (1, 3): 1, (0, 3): 2, (1, 2): 2}


@dataclass(frozen=True)
class ShapeAssignment:
    angles: tuple[tuple, ...]
    level: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(tuple(a) for a in self.angles))
        for i, a in enumerate(self.angles):
            if len(a) != 3:
                raise DimensionMismatch(f"tetrahedron {i}: expected an angle triple")

    @property
    def n(self) -> int:
        return len(self.angles)

    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in a] for a in self.angles])

    def flat(self) -> list:
        return [x for a in self.angles for x in a]

    @classmethod
    def from_flat(cls, values: Sequence, level: float = 0.0) -> "ShapeAssignment":
        v = list(values)
        return cls(tuple(tuple(v[3 * i:3 * i + 3]) for i in range(len(v) // 3)), level)

    def is_shape_structure(self, tol: float = 1e-12) -> bool:
        return all(abs(float(sum(a)) - 1) <= tol and min(float(x) for x in a) > 0
                   for a in self.angles)

    def check_positive(self, tol: float = 1e-12) -> None:
        for i, a in enumerate(self.angles):
            if min(float(x) for x in a) <= 0:
                raise NonPositiveAngles(f"tetrahedron {i} has a non-positive angle: {a}")
            if abs(float(sum(a)) - 1) > tol:
                raise NonPositiveAngles(f"tetrahedron {i}: angles sum to {float(sum(a))}, not 1")


def shape_of(tri: Triangulation) -> ShapeAssignment:
    if tri.angles is None:
        raise DimensionMismatch("triangulation carries no angles")
    return ShapeAssignment(tri.angles)


def edge_weights(tri: Triangulation, shape: ShapeAssignment) -> tuple:
    """Sum of incident angles per edge class; works with any ring of scalars."""
    if shape.n != tri.n:
        raise DimensionMismatch(f"{shape.n} angle triples for {tri.n} tetrahedra")
    out = []
    for cls in tri.cells.edge_classes:
        w = 0
        for t, a, b in cls:
            w = w + shape.angles[t][ANGLE_SLOT[(a, b)]]
        out.append(w)
    return tuple(out)


def weight_matrix(tri: Triangulation) -> list[list[int]]:
    """Integer matrix mapping the flat angle vector to edge weights."""
    W = [[0] * (3 * tri.n) for _ in range(tri.cells.num_edges)]
    for e, cls in enumerate(tri.cells.edge_classes):
        for t, a, b in cls:
            W[e][3 * t + ANGLE_SLOT[(a, b)]] += 1
    return W


def default_targets(tri: Triangulation) -> dict[int, Fraction]:
    """Weight 2 on every internal edge outside gamma."""
    return {e: Fraction(2) for e in tri.internal_edges() if e not in tri.gamma}


def _constraints(tri: Triangulation, targets: Mapping[int, object]):
    rows, rhs = [], []
    for t in range(tri.n):
        r = [0] * (3 * tri.n)
        r[3 * t:3 * t + 3] = [1, 1, 1]
        rows.append(r)
        rhs.append(Fraction(1))
    W = weight_matrix(tri)
    for e in sorted(targets):
        if e in tri.gamma:
            continue
        rows.append(W[e])
        rhs.append(Fraction(targets[e]))
    return rows, rhs


@dataclass(frozen=True)
class BalancedSpace:
    """Affine parametrisation ``basepoint + span(basis)`` of generalised shapes."""

    basepoint: tuple[Fraction, ...]
    basis: tuple[tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def point(self, coords: Sequence) -> list:
        p = list(self.basepoint)
        for c, v in zip(coords, self.basis):
            p = [x + c * y for x, y in zip(p, v)]
        return p


def balanced_space(tri: Triangulation, targets: Mapping[int, object] | None = None) -> BalancedSpace:
    if targets is None:
        targets = default_targets(tri)
    rows, rhs = _constraints(tri, targets)
    sol = exact.solve_affine(rows, rhs)
    if sol is None:
        raise EmptyAffineSpace("edge weight equations are inconsistent")
    x0, basis = sol
    return BalancedSpace(tuple(x0), tuple(tuple(v) for v in basis))


def balanced_space_dim(tri: Triangulation, targets: Mapping[int, object] | None = None) -> int:
    return balanced_space(tri, targets).dim


def solve_shape(tri: Triangulation, targets: Mapping[int, object] | None = None,
                tol: float = 1e-9) -> ShapeAssignment:
    """Strictly positive solution maximising the smallest angle.

    Raises ``Infeasible`` carrying a Motzkin certificate ``y`` with
    ``A^T y >= 0``, ``A^T y != 0`` and ``b . y <= 0`` when no positive
    solution exists.
    """
    if targets is None:
        targets = default_targets(tri)
    rows, rhs = _constraints(tri, targets)
    A = np.array(rows, float)
    b = np.array([float(x) for x in rhs])
    nv = A.shape[1]
    # variables (x, s): maximise s subject to A x = b, x >= s
    c = np.zeros(nv + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A, np.zeros((A.shape[0], 1))])
    A_ub = np.hstack([-np.eye(nv), np.ones((nv, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nv), A_eq=A_eq, b_eq=b,
                  bounds=[(None, None)] * nv + [(None, 1.0)], method="highs")
    if res.status == 3:
        raise UnboundedSlack("slack LP reported unbounded")
    if res.status != 0 or -res.fun <= tol:
        raise Infeasible("no strictly positive angle structure with the requested weights",
                         certificate=_motzkin_certificate(A, b))
    x = res.x[:nv]
    # polish onto the constraint set
    x = x - np.linalg.lstsq(A, A @ x - b, rcond=None)[0]
    return ShapeAssignment.from_flat(x.tolist())


def _motzkin_certificate(A: np.ndarray, b: np.ndarray):
    """Find y with A^T y >= 0, A^T y != 0, b.y <= 0, or None."""
    m, n = A.shape
    # maximise sum(A^T y) with 0 <= A^T y <= 1, b.y <= 0
    c = -(A.sum(axis=1))
    A_ub = np.vstack([-A.T, A.T, b[None, :]])
    b_ub = np.concatenate([np.zeros(n), np.ones(n), [0.0]])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * m, method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    return res.x


# ---------------------------------------------------------------------------
# Lobachevsky function

_B = bernoulli(60)
_LOBA_COEF = np.array([abs(_B[2 * k]) / (2 * k * math.factorial(2 * k + 1)) for k in range(1, 30)])


def lobachevsky(theta):
    """Lobachevsky function, half the Clausen function at twice the angle."""
    th = np.asarray(theta, float)
    r = np.mod(th + np.pi / 2, np.pi) - np.pi / 2  # in [-pi/2, pi/2)
    u = 2 * np.abs(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        cl = u - u * np.log(np.where(u > 0, u, 1.0))
    powers = u[..., None] ** (2 * np.arange(1, 30) + 1)
    cl = cl + powers @ _LOBA_COEF
    out = 0.5 * np.sign(r) * cl
    return out if out.ndim else float(out)


def lobachevsky_derivative(theta):
    return -np.log(np.abs(2 * np.sin(theta)))


# ---------------------------------------------------------------------------
# volume maximisation


@dataclass(frozen=True)
class VolumeResult:
    shape: ShapeAssignment
    volume: float
    kkt_residual: float
    iterations: int
    history: tuple = field(default=(), repr=False)

    def as_dict(self) -> dict:
        return {"volume": self.volume,
                "argmax": [list(map(float, a)) for a in self.shape.angles],
                "kkt_residual": self.kkt_residual, "iterations": self.iterations}


def volume(shape: ShapeAssignment) -> float:
    return float(np.sum(lobachevsky(np.pi * shape.array())))


def volume_gradient(x: np.ndarray) -> np.ndarray:
    """Gradient of the volume with respect to angles in units of pi."""
    return -np.pi * np.log(2 * np.sin(np.pi * x))


def maximize_volume(tri: Triangulation, targets: Mapping[int, object] | None = None,
                    tol: float = 1e-12, max_iter: int = 200) -> VolumeResult:
    """Maximise the Lobachevsky volume over the positive balanced polytope.

    Damped Newton iteration in an orthonormal basis of the balanced fibre,
    started from the max-min-slack interior point.
    """
    start = solve_shape(tri, targets)
    space = balanced_space(tri, targets)
    x = np.array(start.flat(), float)
    if space.dim == 0:
        sh = ShapeAssignment.from_flat(x.tolist())
        return VolumeResult(sh, volume(sh), 0.0, 0)
    N = np.array([[float(v) for v in vec] for vec in space.basis]).T
    N, _ = np.linalg.qr(N)

    def f(z):
        return float(np.sum(lobachevsky(np.pi * z)))

    it = 0
    hist = []
    for it in range(1, max_iter + 1):
        g = N.T @ volume_gradient(x)
        kkt = float(np.linalg.norm(g))
        hist.append(kkt)
        if kkt <= tol:
            break
        Hd = -np.pi ** 2 / np.tan(np.pi * x)
        H = N.T @ (Hd[:, None] * N)
        step = -np.linalg.solve(H, g)
        d = N @ step
        # stay strictly inside the positive orthant, then backtrack
        neg = d < 0
        tmax = np.min(-x[neg] / d[neg]) if np.any(neg) else np.inf
        t = min(1.0, 0.95 * tmax)
        f0 = f(x)
        slope = float(g @ step)
        while f(x + t * d) < f0 + 1e-4 * t * slope and t > 1e-14:
            t *= 0.5
        x = x + t * d
    g = N.T @ volume_gradient(x)
    sh = ShapeAssignment.from_flat(x.tolist())
    return VolumeResult(sh, f(x), float(np.linalg.norm(g)), it, tuple(hist))


def rational_shape(tri: Triangulation, targets: Mapping[int, object] | None = None,
                   max_den: int = 10 ** 6) -> ShapeAssignment:
    """``solve_shape`` snapped to nearby fractions when they satisfy the equations exactly."""
    sh = solve_shape(tri, targets)
    fr = [Fraction(x).limit_denominator(max_den) for x in sh.flat()]
    if targets is None:
        targets = default_targets(tri)
    rows, rhs = _constraints(tri, targets)
    ok = min(fr) > 0 and all(sum(c * v for c, v in zip(r, fr)) == b for r, b in zip(rows, rhs))
    return ShapeAssignment.from_flat(fr) if ok else sh
