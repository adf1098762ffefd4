"""Tetrahedral kernels, state integrals of closed shaped triangulations, and
the one-dimensional integrals attached to the 4_1 and 5_2 knot complements.

Conventions: ``c_b = i Q / 2`` with ``Q = b + 1/b`` and ``hbar = Q^-2``, so
``1 / (2 i sqrt(hbar)) = -c_b``.  For a positive tetrahedron with faces
``x0..x3`` and ``t = x3 - x2`` the kernel is

    delta(x0 - x1 + x2) exp(2 pi i t (x0 - c_b a3) + i pi phi / (4 hbar)) / Phi_b(t - c_b (1 - a1)),

and the kernel of a negative tetrahedron is its complex conjugate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from . import exact
from .angles import ShapeAssignment, edge_weights
from .errors import (DegenerateDeltaSystem, IllConditionedFit, NoDecay, NotAdmissible,
                     NotBalanced, NonPositiveAngles)
from .mesh import Triangulation, homology_h2_truncated
from .qdilog import QDilogParams, log_phi
from .quadrature import QuadConfig, QuadResult, decay_box, integrate_nd

DEFAULT_HBAR_GRID = (0.15, 0.12, 0.10, 0.08, 0.06, 0.05, 0.04, 0.03)


def as_params(params) -> QDilogParams:
    return params if isinstance(params, QDilogParams) else QDilogParams(float(params))


def phi_T(alpha: Sequence[float], hbar: float) -> float:
    a1, _, a3 = alpha
    return a1 * a3 + (a1 - a3) / 3 - (2 * hbar + 1) / 6


def apply_level(Z: complex, level: float, hbar: float) -> complex:
    return Z * cmath.exp(1j * math.pi * level / (4 * hbar))


@dataclass(frozen=True)
class TetKernel:
    """Kernel of one tetrahedron; ``delta`` is the support form on (x0..x3)."""

    sign: int
    alpha: tuple[float, float, float]
    params: QDilogParams
    delta: tuple[int, int, int, int] = (1, -1, 1, 0)

    @property
    def phi(self) -> float:
        return phi_T(self.alpha, self.params.hbar)

    def log_g(self, t) -> np.ndarray:
        """Log of the kernel with the x0 dependence stripped, as a function of t = x3 - x2."""
        a1, _, a3 = self.alpha
        p = self.params
        cb = p.c_b
        t = np.asarray(t, complex)
        ph = 1j * math.pi * self.phi / (4 * p.hbar)
        if self.sign > 0:
            return -2j * math.pi * cb * a3 * t + ph - log_phi(t - cb * (1 - a1), p)
        return -2j * math.pi * cb * a3 * t - ph + log_phi(t + cb * (1 - a1), p)

    def value(self, x) -> complex:
        """Smooth factor of the kernel at real face values (delta omitted)."""
        x0, _, x2, x3 = (float(v) for v in x)
        t = x3 - x2
        return complex(np.exp(self.log_g(np.array([t]))[0] + 2j * math.pi * self.sign * t * x0))

    def support(self, x) -> float:
        return sum(c * v for c, v in zip(self.delta, x))


def tet_kernel(sign: int, angles: Sequence[float], params) -> TetKernel:
    a = tuple(float(v) for v in angles)
    if min(a) <= 0 or abs(sum(a) - 1) > 1e-12:
        raise NonPositiveAngles(f"angles must be positive and sum to 1, got {a}")
    return TetKernel(int(sign), a, as_params(params))


# ---------------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class StateIntegral:
    """A closed state integral reduced to the variables t_T = x3 - x2.

    ``x_of_t`` expresses every face variable through t, ``B`` is the
    symmetric matrix of the quadratic phase exp(2 pi i t^T B t), and
    ``jacobian`` collects the delta and change-of-variable factors.
    """

    tri: Triangulation
    shape: ShapeAssignment
    params: QDilogParams
    kernels: tuple[TetKernel, ...]
    face_var: dict
    nvars: int
    pivots: tuple[int, ...]
    free: tuple[int, ...]
    x_of_t: tuple[tuple[Fraction, ...], ...]
    B: np.ndarray = field(repr=False)
    jacobian: Fraction
    shifts: tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.free)

    def integrand(self, t) -> complex:
        """Reduced integrand at a point of C^n (without the Jacobian)."""
        t = np.asarray(t, complex)
        lg = sum(k.log_g(t[i:i + 1])[0] for i, k in enumerate(self.kernels))
        return complex(np.exp(lg + 2j * math.pi * t @ self.B @ t))

    def faces_at(self, t) -> np.ndarray:
        X = np.array([[float(v) for v in row] for row in self.x_of_t])
        return X @ np.asarray(t, float)

    def kernel_product(self, x) -> complex:
        """Product of the original kernels at face values ``x`` (deltas omitted)."""
        out = 1.0 + 0j
        for ti, k in enumerate(self.kernels):
            xs = [x[self.face_var[(ti, f)]] for f in range(4)]
            out *= k.value(xs)
        return out

    def delta_residuals(self, x) -> list[float]:
        return [k.support([x[self.face_var[(ti, f)]] for f in range(4)])
                for ti, k in enumerate(self.kernels)]


def check_balanced(tri: Triangulation, shape: ShapeAssignment, tol: float = 1e-9) -> None:
    w = edge_weights(tri, shape)
    for e in tri.internal_edges():
        if e in tri.gamma:
            continue
        if abs(float(w[e]) - 2) > tol:
            raise NotBalanced(f"edge {e} has weight {float(w[e]):.12g}, expected 2")


def assemble(tri: Triangulation, shape: ShapeAssignment, params,
             check_topology: bool = True) -> StateIntegral:
    p = as_params(params)
    if not tri.is_closed:
        raise NotAdmissible("only closed triangulations are evaluated")
    if shape.n != tri.n:
        raise NotAdmissible(f"{shape.n} angle triples for {tri.n} tetrahedra")
    shape.check_positive()
    check_balanced(tri, shape)
    if check_topology and not homology_h2_truncated(tri).is_admissible_topology:
        raise NotAdmissible("H_2 of the truncated complex is non-zero")

    face_var = {}
    for v, (a, b) in enumerate(tri.gluings):
        face_var[tuple(a)] = v
        face_var[tuple(b)] = v
    nv = len(tri.gluings)
    n = tri.n
    rows = []
    for t in range(n):
        r = [0] * nv
        for f, c in zip(range(3), (1, -1, 1)):
            r[face_var[(t, f)]] += c
        rows.append(r)
    el = exact.eliminate(rows)
    if el.rank < n:
        raise DegenerateDeltaSystem(f"delta constraints have rank {el.rank} < {n}")
    pivots = el.pivot_cols
    free = el.free_cols
    det_L = exact.det([[rows[r][c] for c in pivots] for r in range(n)])

    # x = P y with y the free variables
    P = [[Fraction(0)] * len(free) for _ in range(nv)]
    for j, f in enumerate(free):
        P[f][j] = Fraction(1)
    for r, c in el.pivots:
        for j, f in enumerate(free):
            P[c][j] = -el.rref[r][f]
    T = [[P[face_var[(t, 3)]][j] - P[face_var[(t, 2)]][j] for j in range(len(free))]
         for t in range(n)]
    if len(free) != n or exact.det(T) == 0:
        raise NoDecay("the integrand is constant along a direction of the reduced "
                      "variables, so the state integral diverges")
    det_T = exact.det(T)
    Ti = exact.inverse(T)
    X = [[sum(P[i][k] * Ti[k][j] for k in range(n)) for j in range(n)] for i in range(nv)]
    M = np.array([[float(s * X[face_var[(t, 0)]][j]) for j in range(n)]
                  for t, s in enumerate(tri.signs)])
    B = 0.5 * (M + M.T)

    kernels = tuple(tet_kernel(s, [float(v) for v in a], p)
                    for s, a in zip(tri.signs, shape.angles))
    jac = 1 / (abs(det_L) * abs(det_T))
    si = StateIntegral(tri, shape, p, kernels, face_var, nv, tuple(pivots), tuple(free),
                       tuple(tuple(r) for r in X), B, jac, (0.0,) * n)
    return _with_shifts(si, choose_shifts(si))


def _with_shifts(si: StateIntegral, shifts) -> StateIntegral:
    return StateIntegral(si.tri, si.shape, si.params, si.kernels, si.face_var, si.nvars,
                         si.pivots, si.free, si.x_of_t, si.B, si.jacobian,
                         tuple(float(s) for s in shifts))


def decay_rates(si: StateIntegral, shifts) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic log-slopes of each axis factor at -inf and +inf."""
    Q = si.params.Q
    sig = np.asarray(shifts, float)
    Bs = si.B @ sig
    left, right = [], []
    for k, (ker, s) in enumerate(zip(si.kernels, sig)):
        a1, _, a3 = ker.alpha
        kappa = math.pi * Q * a3 - 4 * math.pi * Bs[k]
        left.append(kappa)
        if ker.sign > 0:
            right.append(kappa + 2 * math.pi * (s - Q * (1 - a1) / 2))
        else:
            right.append(kappa - 2 * math.pi * (s + Q * (1 - a1) / 2))
    return np.array(left), np.array(right)


def choose_shifts(si: StateIntegral) -> np.ndarray:
    """Imaginary shifts maximising the smallest decay slope, by LP.

    Variables (sigma, m); every axis must decay with slope at least m on
    both sides, and sigma stays at least m / (2 pi) away from the poles.
    """
    n = len(si.kernels)
    Q = si.params.Q
    B = si.B
    A, rhs = [], []
    for k, ker in enumerate(si.kernels):
        a1, _, a3 = ker.alpha
        kappa = math.pi * Q * a3
        # left:  kappa - 4 pi (B s)_k >= m
        row = list(4 * math.pi * B[k]) + [1.0]
        A.append(row)
        rhs.append(kappa)
        # right: slope <= -m
        row = list(-4 * math.pi * B[k]) + [1.0]
        if ker.sign > 0:
            row[k] += 2 * math.pi
            A.append(row)
            rhs.append(-kappa + math.pi * Q * (1 - a1))
        else:
            row[k] -= 2 * math.pi
            A.append(row)
            rhs.append(-kappa + math.pi * Q * (1 - a1))
        # poles
        row = [0.0] * (n + 1)
        row[-1] = 1 / (2 * math.pi)
        if ker.sign > 0:
            row[k] = -1.0
            rhs.append(Q * a1 / 2)
        else:
            row[k] = 1.0
            rhs.append(Q * a1 / 2)
        A.append(row)
    c = np.zeros(n + 1)
    c[-1] = -1
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(rhs),
                  bounds=[(-Q / 2, Q / 2)] * n + [(None, 10.0)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        return np.zeros(n)
    return res.x[:n]


@dataclass(frozen=True)
class StateResult:
    value: complex
    error: float
    dimension: int
    shifts: tuple[float, ...]
    hbar: float

    def as_dict(self) -> dict:
        return {"hbar": self.hbar, "z": {"re": self.value.real, "im": self.value.imag},
                "error_estimate": self.error, "dimension": self.dimension,
                "shifts": list(self.shifts)}


def evaluate(si: StateIntegral, cfg: QuadConfig = QuadConfig(), shifts=None) -> StateResult:
    sh = si.shifts if shifts is None else tuple(float(s) for s in shifts)
    left, right = decay_rates(si, sh)
    if np.any(left <= 0) or np.any(right >= 0):
        raise NoDecay(f"shifts {sh} do not give exponential decay on every axis")
    axes = [lambda t, k=k: np.exp(k.log_g(t)) for k in si.kernels]
    res = integrate_nd(axes, si.B, sh, cfg)
    j = float(si.jacobian)
    return StateResult(res.value * j, res.error * j, si.dimension, sh, si.params.hbar)


def partition_function(tri: Triangulation, shape: ShapeAssignment, params,
                       cfg: QuadConfig = QuadConfig()) -> StateResult:
    return evaluate(assemble(tri, shape, params), cfg)


# ---------------------------------------------------------------------------
# one-dimensional knot integrals


def _choose_eps(logmag_at, upper: float, probe=np.arange(-15, 15, 0.05)) -> float:
    """Downward shift in (0, upper) with the smallest peak modulus of the integrand."""
    best = None
    for frac in np.linspace(0.05, 0.95, 19):
        eps = frac * upper
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            pk = np.nanmax(np.real(logmag_at(probe, eps)))
        if best is None or pk < best[0]:
            best = (pk, eps)
    return float(best[1])


def _line_integral(f, eps: float, cfg: QuadConfig, bend: float = 0.0) -> QuadResult:
    # integral of f(z) over z = u - i eps, or over the curve
    # z = u - i eps - i bend (sqrt(1 + u^2) - 1) when bend > 0; the curve sinks into
    # the region where the Gaussian tails of the quantum dilogarithm decay
    if bend == 0.0:
        return integrate_nd([f], None, [-eps], cfg)
    if bend < 0:
        raise ValueError("bend must be non-negative")

    def g(u):
        r = np.sqrt(1.0 + u * u)
        z = u - 1j * eps - 1j * bend * (r - 1.0)
        return f(z) * (1.0 - 1j * bend * u / r)

    return integrate_nd([g], None, [0.0], cfg)


def _cfg_for(params: QDilogParams, cfg: QuadConfig | None) -> QuadConfig:
    if cfg is not None:
        return cfg
    return QuadConfig(panel=min(0.25, 0.5 / params.b), tol=1e-8)


# used when the horizontal contour picked by the probe has no decay
FALLBACK_BEND = 0.15


def _check_bend(bend, eps, columns, depth):
    if not bend:
        return
    for c in columns:
        if eps + bend * (math.sqrt(1.0 + c * c) - 1.0) >= depth:
            raise NoDecay(f"bent contour reaches the singular ray at Re = {c}")


def chi41_integrand(y, x, params):
    p = as_params(params)
    return np.exp(log_phi(x - y, p) - log_phi(y, p) + 2j * math.pi * x * (2 * y - x))


def chi_41(x: float, params, eps: float | None = None, cfg: QuadConfig | None = None,
           bend: float = 0.0) -> QuadResult:
    """Integral over R - i0 of Phi(x - y) / Phi(y) * exp(2 pi i x (2y - x)) dy.

    ``bend`` > 0 bends the tails of the contour downward; it must stay above the
    singular rays at Re y = 0 and Re y = x, which start at Im y = -Q/2.
    """
    p = as_params(params)
    x = float(x)
    auto = eps is None
    if eps is None:
        eps = _choose_eps(lambda u, e: np.real(np.log(np.abs(chi41_integrand(u - 1j * e, x, p)))),
                          p.Q / 2)
    f = lambda z: chi41_integrand(z, x, p)  # noqa: E731
    if auto and not bend:
        try:
            return _line_integral(f, eps, _cfg_for(p, cfg))
        except NoDecay:
            bend = FALLBACK_BEND
    _check_bend(bend, eps, [0.0, x], p.Q / 2)
    return _line_integral(f, eps, _cfg_for(p, cfg), bend)


def chi52_integrand(z, x, params):
    p = as_params(params)
    return np.exp(-1j * math.pi / 3 + 1j * math.pi * (z - x) * (z + x)
                  - log_phi(z + x, p) - log_phi(z - x, p) - log_phi(z, p))


def chi_52(x, params, lam: float = 0.0, eps: float | None = None,
           cfg: QuadConfig | None = None, bend: float = 0.0) -> QuadResult:
    """e^{-i pi/3} times the integral over R - i0 of
    e^{i pi (z - x)(z + x)} / (Phi(z + x) Phi(z - x) Phi(z)), times e^{4 pi i c_b x lam}."""
    p = as_params(params)
    x = complex(x)
    upper = p.Q / 2 - abs(x.imag)
    if upper <= 0:
        raise NoDecay("no admissible downward shift for this x")
    auto = eps is None
    if eps is None:
        eps = _choose_eps(lambda u, e: np.real(np.log(np.abs(chi52_integrand(u - 1j * e, x, p)))),
                          upper)
    f = lambda z: chi52_integrand(z, x, p)  # noqa: E731
    r = None
    if auto and not bend:
        try:
            r = _line_integral(f, eps, _cfg_for(p, cfg))
        except NoDecay:
            if x.imag:
                raise
            bend = FALLBACK_BEND
    if r is None:
        if bend:
            if x.imag:
                raise ValueError("bent contours need real x")
            _check_bend(bend, eps, [0.0, x.real, -x.real], upper)
        r = _line_integral(f, eps, _cfg_for(p, cfg), bend)
    f = cmath.exp(4j * math.pi * p.c_b * x * lam)
    return QuadResult(r.value * f, r.error * abs(f), r.box, r.nodes)


def nu(a: float, b: float, params) -> complex:
    cb2 = as_params(params).c_b ** 2
    return (cmath.exp(4j * math.pi * cb2 * a * (a + b))
            * cmath.exp(-1j * math.pi * cb2 * (4 * (a - b) + 1) / 6))


def five2_shape(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> ShapeAssignment:
    """Shape on the three 5_2 tetrahedra from half-angles (a_i, b_i, c_i)."""
    return ShapeAssignment(tuple((2 * a[i], 2 * b[i], 2 * c[i]) for i in range(3)))


def check_five2_balance(a, b, c, tol: float = 1e-12) -> None:
    for i in range(3):
        if abs(a[i] + b[i] + c[i] - 0.5) > tol:
            raise NonPositiveAngles(f"a+b+c must equal 1/2 on tetrahedron {i + 1}")
        if min(a[i], b[i], c[i]) <= 0:
            raise NonPositiveAngles("angles must be positive")
    if abs(2 * a[2] - a[0] - c[1]) > tol or abs(b[2] - c[0] - b[1]) > tol:
        raise NotBalanced("5_2 balance: need 2 a3 = a1 + c2 and b3 = c1 + b2")


@dataclass(frozen=True)
class Five2Reduction:
    a: tuple
    b: tuple
    c: tuple
    lam: float
    prefactor: complex
    contour_shift: complex
    value: complex
    error: float
    eps: float


def z52_reduced(a, b, c, params, h: float = 0.05, eps: float | None = None,
                rel_cut: float = 1e-16) -> Five2Reduction:
    """Reduced one-dimensional form of the 5_2 state integral.

    The outer variable runs over 2 c_b (a1 - a3) + R and the inner one over
    R - i eps.  Both use a uniform trapezoid rule with the same step, so
    z + x and z - x fall on shifted lattices and Phi is evaluated only once
    per lattice point.  The error estimate compares steps h and 2h.
    """
    check_five2_balance(a, b, c)
    p = as_params(params)
    cb = p.c_b
    lam = a[0] - c[0] + b[1] - a[2]
    pref = (nu(c[0], b[0], p) * nu(b[1], a[1], p) * nu(c[2], b[2], p)
            * cmath.exp(1j * math.pi * cb ** 2 * (1 - 2 * a[0]) * (1 - 2 * c[1])))
    shift = 2 * cb * (a[0] - a[2])
    eta = shift.imag
    upper = p.Q / 2 - abs(eta)
    if eps is None:
        eps = _choose_eps(lambda u, e: np.real(np.log(np.abs(chi52_integrand(u - 1j * e, shift, p)))),
                          upper)

    # inner box at the contour centre, outer box from a coarse chi scan
    cfg = QuadConfig(rel_cut=rel_cut)
    zlo, zhi = decay_box(lambda u: np.real(np.log(np.abs(chi52_integrand(u - 1j * eps, shift, p)))), cfg)

    def outer_values(h_, ulo, uhi, zlo_, zhi_):
        m0, m1 = int(np.floor(ulo / h_)), int(np.ceil(uhi / h_))
        k0, k1 = int(np.floor(zlo_ / h_)), int(np.ceil(zhi_ / h_))
        m = np.arange(m0, m1 + 1)
        k = np.arange(k0, k1 + 1)
        xs = m * h_ + shift
        zs = k * h_ - 1j * eps
        s_idx = np.arange(k0 + m0, k1 + m1 + 1)
        d_idx = np.arange(k0 - m1, k1 - m0 + 1)
        Lp = log_phi(s_idx * h_ + shift - 1j * eps, p)
        Lm = log_phi(d_idx * h_ - shift - 1j * eps, p)
        L0 = log_phi(zs, p)
        K, Mm = np.meshgrid(k, m)
        expo = (-1j * math.pi / 3 + 1j * math.pi * (zs[None, :] - xs[:, None]) * (zs[None, :] + xs[:, None])
                - Lp[K + Mm - (k0 + m0)] - Lm[K - Mm - (k0 - m1)] - L0[None, :])
        chi = h_ * np.exp(expo).sum(axis=1)
        return xs, chi * np.exp(4j * math.pi * cb * xs * lam)

    # coarse scan for the outer box, with the inner box widened generously
    span = 6.0
    xs, g = outer_values(0.1, -20, 20, zlo - span, zhi + span)
    mag = np.abs(g)
    keep = np.nonzero(mag > mag.max() * rel_cut)[0]
    ulo, uhi = xs[keep[0]].real - 0.5, xs[keep[-1]].real + 0.5
    # the inner mass moves with x, so widen the inner box by the outer reach
    reach = max(abs(ulo), abs(uhi))
    zlo2, zhi2 = zlo - reach, zhi + reach
    xs, g = outer_values(h, ulo, uhi, zlo2, zhi2)
    fine = h * g.sum()
    xs2, g2 = outer_values(2 * h, ulo, uhi, zlo2, zhi2)
    coarse = 2 * h * g2.sum()
    err = abs(fine - coarse)
    val = pref * fine
    return Five2Reduction(tuple(a), tuple(b), tuple(c), lam, pref, shift, val,
                          err * abs(pref), eps)


# ---------------------------------------------------------------------------
# volume rate fits


@dataclass(frozen=True)
class RateFit:
    hbar: tuple[float, ...]
    y: tuple[float, ...]
    volume: float
    p: float
    q: float
    residual_rms: float
    volume_drop_largest: float

    @property
    def drop_shift(self) -> float:
        return abs(self.volume_drop_largest - self.volume) / abs(self.volume)

    def as_dict(self) -> dict:
        return {"hbar": list(self.hbar), "y": list(self.y), "volume": self.volume,
                "p": self.p, "q": self.q, "residual_rms": self.residual_rms,
                "volume_drop_largest": self.volume_drop_largest, "drop_shift": self.drop_shift}


def _lsq(h, y):
    A = np.column_stack([-np.ones_like(h), h * np.log(h), h])
    if np.linalg.cond(A) > 1e12:
        raise IllConditionedFit("design matrix is numerically singular")
    c, *_ = np.linalg.lstsq(A, y, rcond=None)
    return c, A


def fit_volume_rate(values: Sequence[tuple[float, float]]) -> RateFit:
    """Least-squares fit of 2 pi hbar log|J| = -V + p hbar log hbar + q hbar."""
    if len(values) < 5:
        raise IllConditionedFit("need at least five points")
    h = np.array([float(v[0]) for v in values])
    if np.any(np.diff(h) >= 0):
        raise IllConditionedFit("hbar values must be strictly decreasing")
    J = np.array([float(v[1]) for v in values])
    if np.any(J <= 0):
        raise IllConditionedFit("moduli must be positive")
    y = 2 * np.pi * h * np.log(J)
    c, A = _lsq(h, y)
    res = A @ c - y
    c2, _ = _lsq(h[1:], y[1:])
    return RateFit(tuple(h), tuple(y), float(c[0]), float(c[1]), float(c[2]),
                   float(np.sqrt(np.mean(res ** 2))), float(c2[0]))


@dataclass(frozen=True)
class SweepRow:
    hbar: float
    value: complex
    error: float

    @property
    def log_abs(self) -> float:
        return math.log(abs(self.value))

    @property
    def rate(self) -> float:
        return 2 * math.pi * self.hbar * self.log_abs


def sweep(kind: str, grid: Sequence[float] = DEFAULT_HBAR_GRID, x: float = 0.0) -> list[SweepRow]:
    fn = {"chi41": chi_41, "chi52": chi_52}[kind]
    rows = []
    for hb in grid:
        r = fn(x, QDilogParams.from_hbar(hb))
        rows.append(SweepRow(float(hb), r.value, r.error))
    return rows
