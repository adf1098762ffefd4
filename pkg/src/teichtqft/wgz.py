"""The Weil-Gel'fand-Zak transform and the psi / g section family.

A section of the multiplier line bundle is kept as a callable on the plane
(``raw``) together with the truncation order used to build it.  Calling the
section reduces the point to the unit square and applies the multiplier

    phi((m, n), (x, y)) = (-1)^{mn} exp(pi i (n x - m y)),

whereas ``raw`` evaluates the defining sum directly, so quasi-periodicity
can be checked rather than assumed.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridTooCoarse, NoDecay, ParameterError, TruncationInsufficient
from .qdilog import QDilogParams, log_phi
from .quadrature import QuadConfig, decay_box, gl_nodes

DEFAULT_M = 20
DEFAULT_NY = 256


def multiplier(m, n, x, y, conjugate: bool = False):
    val = (-1.0) ** (np.asarray(m) * np.asarray(n)) * np.exp(1j * np.pi * (n * np.asarray(x) - m * np.asarray(y)))
    return np.conj(val) if conjugate else val


@dataclass(frozen=True)
class TorusSection:
    """Section of L (or of its dual when ``conjugate``) over the 2-torus."""

    raw: Callable
    M: int | None = None
    conjugate: bool = False

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        m, n = np.floor(x), np.floor(y)
        x0, y0 = x - m, y - n
        return multiplier(m, n, x0, y0, self.conjugate) * self.raw(x0, y0)

    def grid(self, n: int = 32):
        """Values on the n x n grid j/n of the unit square, rows indexed by x."""
        u = np.arange(n) / n
        X, Y = np.meshgrid(u, u, indexing="ij")
        return u, self.raw(X, Y)


def _tail_check(f, M: int, tol: float) -> None:
    xs = np.linspace(0, 1, 9)
    inside = np.abs(np.concatenate([f(xs + k) for k in range(-M, M + 1, max(1, M // 4))]))
    peak = max(float(np.max(inside)), 1e-300)
    tail = sum(np.abs(f(xs + s * k)) for s in (-1, 1) for k in (M + 1, M + 2))
    if float(np.max(tail)) > tol * peak:
        raise TruncationInsufficient(
            f"terms beyond |m| = {M} reach {float(np.max(tail)) / peak:.2e} of the peak")


def wgz_forward(f: Callable, M: int = DEFAULT_M, conjugate: bool = False,
                tail_tol: float = 1e-14, check: bool = True) -> TorusSection:
    """W f, or the dual transform W f(x, -y) when ``conjugate``.

    ``f`` must accept numpy arrays of real points.
    """
    if check:
        _tail_check(f, M, tail_tol)
    ks = np.arange(-M, M + 1)

    def raw(x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        yy = -y if conjugate else y
        xb, yb = np.broadcast_arrays(x, yy)
        vals = np.asarray(f((xb[..., None] + ks)), complex)
        s = np.sum(vals * np.exp(2j * np.pi * ks * yb[..., None]), axis=-1)
        return np.exp(1j * np.pi * xb * yb) * s

    return TorusSection(raw, M, conjugate)


def wgz_inverse(g: TorusSection, x, n_y: int = DEFAULT_NY):
    """Trapezoid rule for the y-integral of g(x, y) exp(-pi i x y) over [0, 1]."""
    if g.M is not None and n_y <= 2 * g.M:
        raise GridTooCoarse(f"{n_y} y-nodes cannot resolve a section truncated at M = {g.M}")
    x = np.asarray(x, float)
    y = np.arange(n_y) / n_y
    X, Y = np.meshgrid(x.ravel(), y, indexing="ij")
    sgn = 1 if g.conjugate else -1
    vals = g.raw(X, Y) * np.exp(sgn * 1j * np.pi * X * Y)
    out = vals.mean(axis=1).reshape(x.shape)
    return out if out.ndim else complex(out)


def multiplier_check(g: TorusSection, mn: tuple[int, int], samples) -> float:
    m, n = mn
    pts = np.asarray(samples, float).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    lhs = g.raw(x + m, y + n)
    rhs = multiplier(m, n, x, y, g.conjugate) * g.raw(x, y)
    return float(np.max(np.abs(lhs - rhs))) if len(pts) else 0.0


# ---------------------------------------------------------------------------
# tensor square


@dataclass(frozen=True)
class TensorSection:
    raw: Callable          # (s, t, x, y) -> value
    M: int | None = None
    conjugate: bool = False


def wgz_forward_tensor(h: Callable, M: int = DEFAULT_M, conjugate: bool = False) -> TensorSection:
    ks = np.arange(-M, M + 1)
    sg = -1 if conjugate else 1

    def raw(s, t, x, y):
        s, t, x, y = np.broadcast_arrays(*(np.asarray(v, float) for v in (s, t, x, y)))
        S = s[..., None, None] + ks[:, None]
        X = x[..., None, None] + ks[None, :]
        ph = np.exp(sg * 2j * np.pi * (ks[:, None] * t[..., None, None] + ks[None, :] * y[..., None, None]))
        return np.exp(sg * 1j * np.pi * (s * t + x * y)) * np.sum(h(S, X) * ph, axis=(-2, -1))

    return TensorSection(raw, M, conjugate)


def wgz_inverse_tensor(G: TensorSection, s, x, n_y: int = 64):
    if G.M is not None and n_y <= 2 * G.M:
        raise GridTooCoarse(f"{n_y} nodes per axis cannot resolve truncation M = {G.M}")
    s, x = np.broadcast_arrays(np.asarray(s, float), np.asarray(x, float))
    u = np.arange(n_y) / n_y
    T, Y = np.meshgrid(u, u, indexing="ij")
    sg = 1 if G.conjugate else -1
    out = np.empty(s.shape, complex)
    for idx in np.ndindex(s.shape):
        si, xi = s[idx], x[idx]
        vals = G.raw(si, T, xi, Y) * np.exp(sg * 1j * np.pi * (si * T + xi * Y))
        out[idx] = vals.mean()
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# psi and g


@dataclass(frozen=True)
class PsiParams:
    a: float
    c: float
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.a + self.c < 0.5):
            raise ParameterError(f"need a > 0, c > 0 and a + c < 1/2, got a={self.a}, c={self.c}")

    @property
    def qd(self) -> QDilogParams:
        return QDilogParams(self.b)

    def shift_range(self) -> tuple[float, float]:
        """Open interval of imaginary shifts of the t-contour that keep psi analytic and decaying."""
        Q = self.qd.Q
        return -Q * (0.5 - self.a - self.c), Q * self.c


def log_psi(t, p: PsiParams):
    qd = p.qd
    cb = qd.c_b
    t = np.asarray(t, complex)
    s = p.a + p.c
    return (-log_phi(t - 2 * cb * s, qd) - 4j * np.pi * cb * p.a * (t - cb * s)
            - 1j * np.pi * cb * cb * (4 * (p.a - p.c) + 1) / 6)


def psi(t, p: PsiParams):
    val = np.exp(log_psi(t, p))
    return val if np.ndim(t) else complex(val)


def _default_cfg(p: PsiParams) -> QuadConfig:
    return QuadConfig(panel=min(0.25, 0.5 / p.qd.b), tol=1e-10)


@lru_cache(maxsize=32)
def _shift_candidates(p: PsiParams, cfg: QuadConfig):
    """Candidate shifts and the peak of log|psi| along each shifted line."""
    lo, hi = p.shift_range()
    taus = lo + (hi - lo) * np.linspace(0.05, 0.95, 19)
    # keep the right-hand decay rate 2 pi (Q c - tau) fast enough for the probe window
    rate_min = -np.log(cfg.rel_cut) / (0.8 * cfg.max_half_width)
    taus = taus[2 * np.pi * (hi - taus) >= rate_min]
    probe = np.arange(-15, 15, 0.05)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        peaks = np.array([np.nanmax(np.real(log_psi(probe + 1j * tv, p))) for tv in taus])
    return taus, peaks


@lru_cache(maxsize=128)
def _contour_table(p: PsiParams, tau: float, panel: float, cfg: QuadConfig):
    lo, hi = decay_box(lambda u: np.real(log_psi(u + 1j * tau, p)), cfg)
    u, w = gl_nodes(lo, hi, panel, cfg.order)
    z = u + 1j * tau
    return z, w, log_psi(z, p)


def _fourier_on(tau: float, s: np.ndarray, p: PsiParams, cfg: QuadConfig):
    """Integral of psi(t) e^{-2 pi i s t} along Im t = tau, for an array of real s."""
    smax = float(np.max(np.abs(s))) if s.size else 0.0
    # panels halve until they resolve the oscillation; tables are cached per (tau, panel)
    panel = cfg.panel
    while panel > 1.0 / (1.0 + smax):
        panel /= 2

    def run(h):
        z, w, lp = _contour_table(p, tau, h, cfg)
        return np.exp(lp[None, :] - 2j * np.pi * s[:, None] * z[None, :]) @ w

    fine = run(panel)
    coarse = run(2 * panel)
    return fine, np.abs(fine - coarse)


def psi_tilde(s, p: PsiParams, tau: float | None = None, cfg: QuadConfig | None = None,
              return_error: bool = False):
    """Fourier transform of psi on a shifted contour.

    Without ``tau`` each s gets the shift (from a fixed set of fractions of
    the admissible range) whose peak integrand modulus is smallest.
    """
    cfg = cfg or _default_cfg(p)
    s_arr = np.atleast_1d(np.asarray(s, float))
    lo, hi = p.shift_range()
    if tau is not None:
        if not lo < tau < hi:
            raise ParameterError(f"shift {tau} outside ({lo:.6g}, {hi:.6g})")
        groups = {float(tau): np.arange(s_arr.size)}
    else:
        taus, peaks = _shift_candidates(p, cfg)
        # log of the peak modulus of psi(t) e^{-2 pi i s t} on Im t = tau
        score = peaks[None, :] + 2 * np.pi * s_arr[:, None] * taus[None, :]
        pick = np.argmin(score, axis=1)
        groups = {float(taus[k]): np.nonzero(pick == k)[0] for k in np.unique(pick)}
    val = np.empty(s_arr.size, complex)
    err = np.empty(s_arr.size)
    for tv, idx in groups.items():
        v, e = _fourier_on(tv, s_arr[idx], p, cfg)
        val[idx], err[idx] = v, e
    val = val.reshape(np.shape(s))
    err = err.reshape(np.shape(s))
    if not np.ndim(s):
        val, err = complex(val), float(err)
    return (val, err) if return_error else val


def psi_tilde_prime(s, p: PsiParams, **kw):
    return np.exp(-1j * np.pi * np.asarray(s, float) ** 2) * psi_tilde(s, p, **kw)


def psi_family(t, s, p: PsiParams):
    """(psi(t), psi~(s), psi~'(s))."""
    pt = psi_tilde(s, p)
    return psi(t, p), pt, np.exp(-1j * np.pi * np.asarray(s, float) ** 2) * pt


def g_section(p: PsiParams, M: int = DEFAULT_M, tail_tol: float = 1e-9) -> TorusSection:
    """g_{a,c} = W(psi~'), with psi~' tabulated lazily per distinct sample point."""
    cache: dict[float, complex] = {}

    def f(u):
        u = np.asarray(u, float)
        flat = u.ravel()
        keys = np.round(flat, 15)
        todo = np.unique(keys[[k not in cache for k in keys.tolist()]]) if flat.size else flat
        if todo.size:
            vals = psi_tilde_prime(todo, p)
            cache.update(zip(todo.tolist(), np.atleast_1d(vals).tolist()))
        return np.array([cache[k] for k in keys.tolist()], complex).reshape(u.shape)

    return wgz_forward(f, M, tail_tol=tail_tol)
