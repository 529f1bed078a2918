"""Space-time grids and Steklov averaging of problem data.

The solver works on uniform grids x_i = i*h (h = ell/m) and t_k = k*tau
(tau = T/n).  Grid construction enforces the parabolic mesh condition
h/tau >= 8*||b||_inf / slope_lo whenever the drift coefficient b is
nonzero, and warns when tau is large enough to void the uniqueness
argument for the per-step nonlinear system.

Continuous data enter the scheme only through cell averages: time
averages w_k over (t_{k-1}, t_k], space averages over [x_i, x_{i+1}]
with the right endpoint taken pointwise, and full cell averages for the
coefficients.  Averages are computed with 5-point Gauss-Legendre tensor
quadrature plus one adaptive refinement, which is exact to roundoff for
the smooth configured data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "Grid", "ProblemData", "AveragedData", "MeshConditionError", "DataValidationError",
    "make_grid", "steklov_time", "steklov_space", "steklov_cell",
    "average_data", "sup_norms",
]

_GL5 = leggauss(5)
_REFINE_TOL = 1e-10


class MeshConditionError(ValueError):
    """h/tau too small relative to 8*||b||/slope_lo."""


class DataValidationError(ValueError):
    """Problem data violates a structural assumption (e.g. a < a0)."""


@dataclass(frozen=True)
class Grid:
    ell: float
    T: float
    m: int
    n: int
    h: float
    tau: float
    xs: np.ndarray = field(repr=False)
    ts: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ProblemData:
    """Continuous problem description.

    a, b, c, f are callables of (x, t); phi and omega of x alone; p of
    t alone (Expr objects qualify).  a0 is the uniform ellipticity
    floor for a, R the control-ball radius.
    """
    a: Callable
    b: Callable
    c: Callable
    f: Callable
    phi: Callable
    p: Callable
    omega: Callable
    a0: float
    ell: float
    T: float
    R: float


@dataclass(frozen=True)
class AveragedData:
    """Cell averages feeding the discrete scheme.

    Coefficient matrices have shape (n, m); row j holds time slab
    k = j + 1 (slabs are 1-based as in the scheme).  phi has m+1
    entries with phi[m] = phi(ell) pointwise; p has n+1 entries with
    p[0] = p(0).
    """
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    f: np.ndarray
    phi: np.ndarray
    p: np.ndarray

    def row(self, k):
        """(a_k, b_k, c_k, f_k) for time slab k in 1..n."""
        j = k - 1
        return self.a[j], self.b[j], self.c[j], self.f[j]


def _gl_segments(lo_edges, hi_edges, fn):
    """Vectorized 5-point Gauss-Legendre integral on many segments."""
    nodes, weights = _GL5
    mid = 0.5 * (lo_edges + hi_edges)
    half = 0.5 * (hi_edges - lo_edges)
    pts = mid[..., None] + half[..., None] * nodes
    vals = fn(pts)
    return (vals * weights).sum(axis=-1) * half


def _average_1d(fn, edges):
    """Interval averages of fn over consecutive edges, GL5 + one refinement."""
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    coarse = _gl_segments(lo, hi, fn)
    mid = 0.5 * (lo + hi)
    fine = _gl_segments(lo, mid, fn) + _gl_segments(mid, hi, fn)
    out = np.where(np.abs(fine - coarse) > _REFINE_TOL, fine, coarse)
    return out / width


def steklov_time(w, grid):
    """Time averages w_k = (1/tau) * int over (t_{k-1}, t_k], k=1..n,
    with w_0 = w(0) from the constant extension to [-tau, 0]."""
    out = np.empty(grid.n + 1)
    out[0] = float(w(0.0))
    out[1:] = _average_1d(lambda t: np.asarray(w(t), dtype=float), grid.ts)
    return out

def steklov_space(phi, grid):
    """Space averages phi_i over [x_i, x_{i+1}] for i < m; phi_m = phi(ell)."""
    out = np.empty(grid.m + 1)
    out[:-1] = _average_1d(lambda x: np.asarray(phi(x), dtype=float), grid.xs)
    out[-1] = float(phi(grid.ell))
    return out


def steklov_cell(q, grid):
    """Cell averages q_ik, shape (n, m) with row j = time slab j+1."""
    nodes, weights = _GL5
    xs, ts = grid.xs, grid.ts

    def cell_integrals(x_lo, x_hi, t_lo, t_hi):
        # tensor GL5 x GL5 on the (n, m) grid of cells
        xm = 0.5 * (x_lo + x_hi)
        xh = 0.5 * (x_hi - x_lo)
        tm = 0.5 * (t_lo + t_hi)
        th = 0.5 * (t_hi - t_lo)
        X = xm[None, :, None, None] + xh[None, :, None, None] * nodes[None, None, :, None]
        Tt = tm[:, None, None, None] + th[:, None, None, None] * nodes[None, None, None, :]
        vals = np.asarray(q(X, Tt), dtype=float)
        target = np.broadcast_shapes(X.shape, Tt.shape)
        if vals.shape != target:
            vals = np.broadcast_to(vals, target)
        w2 = weights[:, None] * weights[None, :]
        return (vals * w2).sum(axis=(-2, -1)) * (xh[None, :] * th[:, None])

    x_lo, x_hi = xs[:-1], xs[1:]
    t_lo, t_hi = ts[:-1], ts[1:]
    coarse = cell_integrals(x_lo, x_hi, t_lo, t_hi)
    xm = 0.5 * (x_lo + x_hi)
    tm = 0.5 * (t_lo + t_hi)
    fine = (cell_integrals(x_lo, xm, t_lo, tm) + cell_integrals(xm, x_hi, t_lo, tm)
            + cell_integrals(x_lo, xm, tm, t_hi) + cell_integrals(xm, x_hi, tm, t_hi))
    out = np.where(np.abs(fine - coarse) > _REFINE_TOL, fine, coarse)
    area = (x_hi - x_lo)[None, :] * (t_hi - t_lo)[:, None]
    return out / area


def sup_norms(data, grid, refine=4):
    """Lattice sup-norm estimates on a grid ``refine`` times finer.

    Returns a dict with 'a', 'b', 'c', 'f' sup norms, 'a_min', and the
    sup norms of 'phi' and 'p'.  These are sampling estimates, not
    certified bounds.
    """
    xs = np.linspace(0.0, grid.ell, refine * grid.m + 1)
    ts = np.linspace(0.0, grid.T, refine * grid.n + 1)
    X, Tt = np.meshgrid(xs, ts, indexing="ij")
    out = {}
    for name in ("a", "b", "c", "f"):
        vals = np.broadcast_to(np.asarray(getattr(data, name)(X, Tt), dtype=float), X.shape)
        out[name] = float(np.abs(vals).max())
        if name == "a":
            out["a_min"] = float(vals.min())
    out["phi"] = float(np.abs(np.asarray(data.phi(xs), dtype=float)).max())
    out["p"] = float(np.abs(np.asarray(data.p(ts), dtype=float)).max())
    return out


def make_grid(data, graph, m, n):
    """Build the (m, n) grid, enforcing the mesh and data conditions.

    Raises MeshConditionError when b is nonzero and h/tau falls below
    8*||b||/slope_lo, DataValidationError when the sampled a drops
    below a0, and warns (without failing) when tau is not below
    slope_lo / (||c|| + ||b||^2/(2*a0)), the smallness used by the
    uniqueness argument for the per-step system.
    """
    if m < 1 or n < 1:
        raise ValueError("grid sizes m, n must be >= 1")
    h = data.ell / m
    tau = data.T / n
    grid = Grid(ell=data.ell, T=data.T, m=int(m), n=int(n), h=h, tau=tau,
                xs=np.linspace(0.0, data.ell, m + 1),
                ts=np.linspace(0.0, data.T, n + 1))
    norms = sup_norms(data, grid)
    if norms["a_min"] < data.a0 - 1e-12 * max(1.0, data.a0):
        raise DataValidationError(
            f"coefficient a dips to {norms['a_min']} below the declared floor a0={data.a0}")
    b_sup = norms["b"]
    if b_sup > 0.0 and h / tau < 8.0 * b_sup / graph.slope_lo:
        raise MeshConditionError(
            f"mesh condition violated: h/tau = {h / tau:.6g} < "
            f"8*||b||/slope_lo = {8.0 * b_sup / graph.slope_lo:.6g}")
    denom = norms["c"] + b_sup ** 2 / (2.0 * data.a0)
    if denom > 0.0 and tau >= graph.slope_lo / denom:
        warnings.warn(
            f"tau = {tau:.6g} is not below slope_lo/(||c|| + ||b||^2/(2 a0)) "
            f"= {graph.slope_lo / denom:.6g}; per-step uniqueness is not "
            f"guaranteed by the smallness argument", UserWarning, stacklevel=2)
    return grid


def average_data(data, grid):
    """Steklov-average all fields of ``data`` on ``grid``."""
    return AveragedData(
        a=steklov_cell(data.a, grid),
        b=steklov_cell(data.b, grid),
        c=steklov_cell(data.c, grid),
        f=steklov_cell(data.f, grid),
        phi=steklov_space(data.phi, grid),
        p=steklov_time(data.p, grid),
    )
