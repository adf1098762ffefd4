"""Faddeev's quantum dilogarithm for real ``b``.

Inside the strip ``|Im z| < Q/2`` (``Q = b + 1/b``) the logarithm is

    log Phi(z) = i pi z^2 / 2 + i pi (b^2 + b^-2) / 24
                 - (i/2) int_0^inf [ sin(2 z w) / (w sinh(b w) sinh(w / b)) - 2 z / w^2 ] dw,

a real-axis rewriting of the contour integral in which the pole at the
origin has been subtracted.  The integral is done with composite
Gauss-Legendre panels.  Points outside a thin central strip are moved in
with the shift equations, and far out on the real axis the known
exponentially small corrections are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ArgumentOutOfCalibratedRange, NonPositiveB, PoleProximity


@dataclass(frozen=True)
class QDilogParams:
    b: float

    def __post_init__(self):
        if not (self.b > 0 and np.isfinite(self.b)):
            raise NonPositiveB(f"b must be a positive real number, got {self.b}")
        # normalise to b >= 1; every quantity below is symmetric in b <-> 1/b
        object.__setattr__(self, "b", max(self.b, 1.0 / self.b))

    @classmethod
    def from_hbar(cls, hbar: float) -> "QDilogParams":
        if not 0 < hbar <= 0.25:
            raise NonPositiveB(f"hbar must lie in (0, 1/4], got {hbar}")
        Q = 1.0 / np.sqrt(hbar)
        # b + 1/b = Q with b >= 1
        return cls(0.5 * (Q + np.sqrt(max(Q * Q - 4.0, 0.0))))

    @property
    def Q(self) -> float:
        return self.b + 1.0 / self.b

    @property
    def hbar(self) -> float:
        return self.Q ** -2

    @property
    def c_b(self) -> complex:
        return 0.5j * self.Q

    @property
    def h(self) -> float:
        """Half-width of the strip where the integral representation holds."""
        return 0.5 * self.Q


def param_map(b: float) -> QDilogParams:
    return QDilogParams(b)


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs of the strip integral.

    ``decay_lengths`` sets the truncation point in units of the integrand's
    exponential decay length; ``panel_scale`` < 1 refines all panels.
    """

    order: int = 24
    decay_lengths: float = 38.0
    panel_scale: float = 1.0
    max_re: float = 60.0
    max_im_factor: float = 6.0
    pole_tol: float = 1e-8
    chunk: int = 256


DEFAULT = QuadratureConfig()


def _sin_minus_id(x):
    out = np.sin(x) - x
    small = np.abs(x) < 0.8
    if np.any(small):
        xs = x[small]
        x2 = xs * xs
        term = -xs * x2 / 6
        acc = term.copy()
        for k in range(2, 12):
            term = -term * x2 / ((2 * k) * (2 * k + 1))
            acc += term
        out[small] = acc
    return out


def _sinhc_m1(u):
    # sinh(u)/u - 1 without cancellation
    out = np.sinh(u) / np.where(u == 0, 1, u) - 1
    small = np.abs(u) < 0.8
    if np.any(small):
        us = u[small]
        u2 = us * us
        term = u2 / 6
        acc = term.copy()
        for k in range(2, 12):
            term = term * u2 / ((2 * k) * (2 * k + 1))
            acc += term
        out[small] = acc
    return out


def _strip_integral(z: np.ndarray, b: float, cfg: QuadratureConfig) -> np.ndarray:
    Q = b + 1 / b
    rate = Q - 2 * np.max(np.abs(z.imag))
    A = cfg.decay_lengths / rate
    hp = cfg.panel_scale * min(np.pi / (2 * b), 2.0 / (1 + np.max(np.abs(z.real))), 0.5)
    npan = int(np.ceil(A / hp))
    gx, gw = leggauss(cfg.order)
    edges = np.linspace(0, A, npan + 1)
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    w = (half * gx + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    wt = (half * gw).ravel()
    bw, wb = b * w, w / b
    s_m1 = _sinhc_m1(bw) * (1 + _sinhc_m1(wb)) + _sinhc_m1(wb)
    den = w * np.sinh(bw) * np.sinh(wb)
    x = 2 * z[:, None] * w[None, :]
    num = _sin_minus_id(x) - x * s_m1[None, :]
    I = (num / den[None, :]) @ wt - 2 * z / A
    return 1j * np.pi * z * z / 2 + 1j * np.pi * (b * b + 1 / b ** 2) / 24 - 0.5j * I


def _log1pexp(u: np.ndarray) -> np.ndarray:
    """Principal-branch-free log(1 + e^u) that never overflows."""
    big = u.real > 0
    out = np.empty_like(u)
    out[big] = u[big] + np.log1p(np.exp(-u[big]))
    out[~big] = np.log1p(np.exp(u[~big]))
    return out


def _check_divisor(u: np.ndarray, tol: float) -> None:
    # |1 + e^u| small means a zero or pole of Phi is close by
    near = np.abs(u.real) < 1.0
    if np.any(near) and np.min(np.abs(1 + np.exp(u[near]))) < tol:
        raise PoleProximity("argument within tolerance of a zero or pole of the quantum dilogarithm")


def log_phi(z, params: QDilogParams | float, cfg: QuadratureConfig = DEFAULT) -> np.ndarray:
    """Logarithm of Phi_b on arrays (continuous in z, not the principal branch)."""
    p = params if isinstance(params, QDilogParams) else QDilogParams(params)
    b = p.b
    z = np.array(z, dtype=complex)
    shape = z.shape
    z = z.ravel().copy()
    if z.size == 0:
        return z.reshape(shape)
    if np.any(np.abs(z.real) > cfg.max_re) or np.any(np.abs(z.imag) > cfg.max_im_factor * p.h):
        raise ArgumentOutOfCalibratedRange(
            f"|Re z| <= {cfg.max_re} and |Im z| <= {cfg.max_im_factor}*h required")
    acc = np.zeros_like(z)

    # coarse steps of i*b, then fine steps of i/b, into |Im z| <= 1/(2b)
    steps = ([b] if b > 1.0 else []) + [1 / b]
    for s in steps:
        lim = 0.5 * s
        for _ in range(10000):
            up = z.imag > lim + 1e-13
            dn = z.imag < -lim - 1e-13
            if not (up.any() or dn.any()):
                break
            if up.any():
                # Phi(w + i s/2) = Phi(w - i s/2) / (1 + e^{2 pi s w}),  w = z - i s/2
                u = 2 * np.pi * s * (z[up] - 0.5j * s)
                _check_divisor(u, cfg.pole_tol)
                acc[up] -= _log1pexp(u)
                z[up] -= 1j * s
            if dn.any():
                u = 2 * np.pi * s * (z[dn] + 0.5j * s)
                _check_divisor(u, cfg.pole_tol)
                acc[dn] += _log1pexp(u)
                z[dn] += 1j * s

    out = np.empty_like(z)
    # far on the real axis the corrections are below 1e-17 relative
    cut = 45.0 * b / (2 * np.pi)
    left = z.real < -cut
    right = z.real > cut
    mid = ~(left | right)
    out[left] = 0.0
    zr = z[right]
    out[right] = 1j * np.pi * zr * zr + 1j * np.pi * (b * b + 1 / b ** 2) / 12
    idx = np.nonzero(mid)[0]
    idx = idx[np.argsort(np.abs(z[idx].real))]
    for i in range(0, idx.size, cfg.chunk):
        sel = idx[i:i + cfg.chunk]
        out[sel] = _strip_integral(z[sel], b, cfg)
    return (out + acc).reshape(shape)


def log_phi_exchanged(z, b: float, cfg: QuadratureConfig = DEFAULT) -> np.ndarray:
    """log Phi evaluated at the parameter min(b, 1/b) without normalising.

    The reduction uses steps of i/b' only (b' < 1), so the strip integral runs
    at b' on the wider strip |Im z| <= 1/(2b').  Agreement with ``log_phi``
    is a check of the b <-> 1/b symmetry by two different routes.
    """
    bs = min(float(b), 1.0 / float(b))
    h = 0.5 * (bs + 1 / bs)
    z = np.array(z, dtype=complex)
    shape = z.shape
    z = z.ravel().copy()
    if np.any(np.abs(z.real) > 45.0 / (2 * np.pi * bs)) or np.any(np.abs(z.imag) > cfg.max_im_factor * h):
        raise ArgumentOutOfCalibratedRange("argument outside the range of the exchanged route")
    acc = np.zeros_like(z)
    s = 1 / bs
    while True:
        up = z.imag > 0.5 * s + 1e-13
        dn = z.imag < -0.5 * s - 1e-13
        if not (up.any() or dn.any()):
            break
        u = 2 * np.pi * s * (z[up] - 0.5j * s)
        acc[up] -= _log1pexp(u)
        z[up] -= 1j * s
        u = 2 * np.pi * s * (z[dn] + 0.5j * s)
        acc[dn] += _log1pexp(u)
        z[dn] += 1j * s
    return (_strip_integral(z, bs, cfg) + acc).reshape(shape)


def phi(z, params: QDilogParams | float, cfg: QuadratureConfig = DEFAULT):
    val = np.exp(log_phi(z, params, cfg))
    return val if np.ndim(z) else complex(val)


def phi_bar(z, params, cfg: QuadratureConfig = DEFAULT):
    """The reciprocal 1/Phi_b, written as a function of z."""
    val = np.exp(-log_phi(z, params, cfg))
    return val if np.ndim(z) else complex(val)
