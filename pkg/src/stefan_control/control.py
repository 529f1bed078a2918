"""Discrete boundary controls and the maps to/from continuous ones.

A discrete control is the vector (g_0, ..., g_n) with the discrete
Sobolev norm

    ||g||^2 = sum_{k>=1} tau * g_k^2 + sum_{k>=1} tau * ((g_k - g_{k-1})/tau)^2,

whose ball of radius R is the feasible set of the optimization.  The
averaging map takes a continuous control to its slab averages (with
g_0 = g(0) from the constant extension below t = 0); the interpolation
map goes back via the continuous piecewise-linear interpolant, closed
at t = T.  Projection onto the ball is radial scaling, which is the
exact metric projection in the norm's own inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import _average_1d

__all__ = [
    "DiscreteControl", "PiecewiseLinearControl",
    "discrete_norm", "qn_map", "pn_map", "project",
    "pl_w21_norm", "pl_l2_norm", "l2_distance_pl", "l2_distance_pl_fn",
    "fn_w21_norm",
]


@dataclass(frozen=True)
class DiscreteControl:
    g: np.ndarray
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        if self.g.ndim != 1 or len(self.g) < 2:
            raise ValueError("control needs entries g_0..g_n with n >= 1")

    @property
    def n(self):
        return len(self.g) - 1


@dataclass(frozen=True)
class PiecewiseLinearControl:
    """Continuous interpolant through (t_k, g_k); value at T is g_n."""
    ts: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __call__(self, t):
        return np.interp(t, self.ts, self.values)

    @property
    def T(self):
        return float(self.ts[-1])


def discrete_norm(gd):
    """Discrete w21 norm of a control vector."""
    g = gd.g
    tau = gd.tau
    diff = np.diff(g) / tau
    return float(np.sqrt(tau * (g[1:] ** 2).sum() + tau * (diff ** 2).sum()))


def qn_map(g_fn, grid):
    """Slab-average a continuous control onto the grid (g_0 = g(0))."""
    out = np.empty(grid.n + 1)
    out[0] = float(g_fn(0.0))
    out[1:] = _average_1d(lambda t: np.asarray(g_fn(t), dtype=float), grid.ts)
    return DiscreteControl(g=out, tau=grid.tau)


def pn_map(gd):
    """Piecewise-linear interpolant of a discrete control."""
    n = gd.n
    ts = np.arange(n + 1) * gd.tau
    return PiecewiseLinearControl(ts=ts, values=gd.g.copy())


def project(gd, R):
    """Metric projection onto the ball of radius R (radial scaling)."""
    if R <= 0:
        raise ValueError("control radius R must be positive")
    nrm = discrete_norm(gd)
    if nrm <= R:
        return gd
    return DiscreteControl(g=gd.g * (R / nrm), tau=gd.tau)


# --- norm utilities for piecewise-linear and smooth controls ---------

def pl_l2_norm(pl):
    """Exact L2(0, T) norm of a piecewise-linear function."""
    a = pl.values[:-1]
    b = pl.values[1:]
    w = np.diff(pl.ts)
    return float(np.sqrt((w * (a * a + a * b + b * b) / 3.0).sum()))


def pl_w21_norm(pl):
    """Exact W21(0, T) norm of a piecewise-linear function."""
    a = pl.values[:-1]
    b = pl.values[1:]
    w = np.diff(pl.ts)
    val = (w * (a * a + a * b + b * b) / 3.0).sum()
    der = (((b - a) / w) ** 2 * w).sum()
    return float(np.sqrt(val + der))


def l2_distance_pl(p1, p2):
    """Exact L2 distance between two piecewise-linear functions on a
    common interval (union-grid integration, Simpson per segment)."""
    if abs(p1.T - p2.T) > 1e-12 * max(1.0, p1.T):
        raise ValueError("controls live on different horizons")
    ts = np.union1d(p1.ts, p2.ts)
    mid = 0.5 * (ts[:-1] + ts[1:])
    w = np.diff(ts)
    d_lo = p1(ts[:-1]) - p2(ts[:-1])
    d_mid = p1(mid) - p2(mid)
    d_hi = p1(ts[1:]) - p2(ts[1:])
    # Simpson is exact for the quadratic (difference)^2
    return float(np.sqrt((w / 6.0 * (d_lo ** 2 + 4.0 * d_mid ** 2 + d_hi ** 2)).sum()))


_GL7 = leggauss(7)


def l2_distance_pl_fn(pl, fn, panels_per_seg=4):
    """L2 distance between a piecewise-linear function and a smooth one,
    by Gauss-Legendre panels on each linear segment."""
    nodes, weights = _GL7
    total = 0.0
    for lo, hi in zip(pl.ts[:-1], pl.ts[1:]):
        edges = np.linspace(lo, hi, panels_per_seg + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        pts = mid[:, None] + half[:, None] * nodes
        diff = pl(pts) - np.asarray(fn(pts), dtype=float)
        total += ((diff ** 2 * weights).sum(axis=-1) * half).sum()
    return float(np.sqrt(total))


def fn_w21_norm(fn, T, panels=400, fd_step=None):
    """W21(0, T) norm estimate for a smooth callable.

    The derivative is taken by central differences (step fd_step,
    default 1e-6*T), so this is a diagnostic-grade estimate rather
    than a certified value.
    """
    nodes, weights = _GL7
    h = fd_step if fd_step is not None else 1e-6 * T
    edges = np.linspace(0.0, T, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * nodes
    vals = np.asarray(fn(pts), dtype=float)
    lo = np.clip(pts - h, 0.0, T)
    hi = np.clip(pts + h, 0.0, T)
    ders = (np.asarray(fn(hi), dtype=float) - np.asarray(fn(lo), dtype=float)) / (hi - lo)
    vals = np.broadcast_to(vals, pts.shape)
    total = (((vals ** 2 + ders ** 2) * weights).sum(axis=-1) * half).sum()
    return float(np.sqrt(total))
