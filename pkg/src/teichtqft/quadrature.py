"""Quadrature on shifted real contours.

Integrands are analytic and decay exponentially in every direction along
the chosen contour.  Boxes are found by probing the log-magnitude, and the
error estimate comes from comparing two panel widths.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ArgumentOutOfCalibratedRange, NoDecay, ToleranceNotMet


@dataclass(frozen=True)
class QuadConfig:
    panel: float = 0.25
    order: int = 16
    rel_cut: float = 1e-15
    tol: float = 1e-8
    max_refine: int = 2
    probe_step: float = 0.05
    probe_start: float = 4.0
    max_half_width: float = 60.0


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    box: tuple
    nodes: int

    def as_dict(self) -> dict:
        return {"re": self.value.real, "im": self.value.imag, "error_estimate": self.error,
                "box": [list(map(float, b)) for b in self.box], "nodes": self.nodes}


def gl_nodes(lo: float, hi: float, panel: float, order: int):
    npan = max(1, int(np.ceil((hi - lo) / panel)))
    edges = np.linspace(lo, hi, npan + 1)
    gx, gw = leggauss(order)
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    x = (half * gx + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    w = (half * gw).ravel()
    return x, w


def decay_box(logmag: Callable[[np.ndarray], np.ndarray], cfg: QuadConfig = QuadConfig(),
              center: float = 0.0) -> tuple[float, float]:
    """Smallest interval outside which the magnitude is below ``rel_cut`` of its peak.

    ``logmag`` maps real points to log|f|.  The window grows until both ends
    fall below the cut while still decreasing outward; ``NoDecay`` if not.
    """
    cut = np.log(cfg.rel_cut)
    half = cfg.probe_start
    while True:
        u = np.arange(center - half, center + half + cfg.probe_step / 2, cfg.probe_step)
        try:
            lm = np.real(logmag(u))
        except ArgumentOutOfCalibratedRange as e:
            raise NoDecay(f"probe window left the calibrated range: {e}") from None
        lm = np.where(np.isfinite(lm), lm, -np.inf)
        if not np.any(np.isfinite(lm)):
            raise NoDecay("integrand vanishes or overflows on the probe window")
        peak = np.max(lm)
        above = np.nonzero(lm > peak + cut)[0]
        left_ok = above[0] > 0 and lm[0] < lm[min(5, len(lm) - 1)]
        right_ok = above[-1] < len(u) - 1 and lm[-1] < lm[max(-6, -len(lm))]
        if left_ok and right_ok:
            pad = 2 * cfg.probe_step
            return float(u[above[0]] - pad), float(u[above[-1]] + pad)
        if half >= cfg.max_half_width:
            raise NoDecay(f"integrand does not decay to {cfg.rel_cut:g} of its peak "
                          f"within |u| <= {cfg.max_half_width}")
        half = min(2 * half, cfg.max_half_width)


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], shift: float = 0.0,
                 cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Integral of ``f`` along ``Im t = shift``."""
    return integrate_nd([f], None, [shift], cfg)


def integrate_nd(axes: Sequence[Callable[[np.ndarray], np.ndarray]], coupling,
                 shifts: Sequence[float], cfg: QuadConfig = QuadConfig()) -> QuadResult:
    """Integral over R^n + i*shifts of prod_k g_k(t_k) * exp(2 pi i t^T B t).

    ``coupling`` is the real symmetric matrix B (or None).  After the shift
    the modulus of the integrand is a product of one-variable factors, so
    the box is found axis by axis and the off-diagonal phases are
    contracted with ``einsum``.
    """
    n = len(axes)
    B = np.zeros((n, n)) if coupling is None else np.asarray(coupling, float)
    sig = np.asarray(shifts, float)
    Bs = B @ sig
    const = np.exp(-2j * np.pi * sig @ Bs)

    def axis_fn(k):
        def g(u):
            t = u + 1j * sig[k]
            return axes[k](t) * np.exp(2j * np.pi * B[k, k] * u * u - 4 * np.pi * Bs[k] * u)
        return g

    fns = [axis_fn(k) for k in range(n)]

    def logmag(k):
        def lm(u):
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                return np.log(np.abs(fns[k](u)))
        return lm

    box = [decay_box(logmag(k), cfg) for k in range(n)]

    letters = string.ascii_lowercase[:n]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if B[i, j] != 0]
    spec = ",".join(list(letters) + [letters[i] + letters[j] for i, j in pairs]) + "->"

    def run(panel):
        xs, ops = [], []
        for k in range(n):
            x, w = gl_nodes(*box[k], panel, cfg.order)
            xs.append(x)
            ops.append(w * fns[k](x))
        for i, j in pairs:
            ops.append(np.exp(4j * np.pi * B[i, j] * np.outer(xs[i], xs[j])))
        val = np.einsum(spec, *ops, optimize="greedy") if n > 1 or pairs else np.sum(ops[0])
        return complex(val * const), sum(len(x) for x in xs)

    panel = cfg.panel
    coarse, _ = run(2 * panel)
    for _ in range(cfg.max_refine + 1):
        fine, nodes = run(panel)
        err = abs(fine - coarse)
        if err <= cfg.tol * max(abs(fine), 1e-300):
            return QuadResult(fine, err, tuple(box), nodes)
        coarse = fine
        panel /= 2
    raise ToleranceNotMet(f"relative error {err / max(abs(fine), 1e-300):.2e} exceeds {cfg.tol:g}")
