"""Maximal monotone enthalpy graph and its smooth approximations.

The graph maps temperature to enthalpy: finitely many phase-transition
temperatures v^1 < ... < v^J, a positive latent-heat jump at each, and
monotone piecewise-linear branches between them whose slopes lie in
[slope_lo, slope_hi].  The solver never touches the multivalued graph
directly; it works with the mollified functions

    bn(v)  = integral of beta(y) * w_n(v - y) over |y - v| <= 1/n,
    bn'(v) = branch-slope convolution + jump * w_n(v - v^j) terms,

where w_n is the standard compactly supported bump kernel scaled to
width 1/n.  Because the branches are piecewise linear, the convolution
is integrated exactly piece by piece against cached moments of the
kernel; only the kernel moments themselves are obtained by quadrature
(Gauss-Legendre panels, accurate to machine precision).

bn is strictly increasing with bn'(v) >= slope_lo everywhere, and
bn(v) = beta(v) exactly wherever beta is linear on the whole window.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "BetaGraph", "SmoothedBeta", "BetaGraphError",
    "build_graph", "mollifier_constant",
]

_GL_ORDER = 10
_N_PANELS = 512


class BetaGraphError(ValueError):
    """Invalid graph data (non-monotone, slope out of bounds, ...)."""


@lru_cache(maxsize=1)
def _gl_rule():
    nodes, weights = leggauss(_GL_ORDER)
    return nodes, weights


def _bump(s, const):
    """Unscaled kernel const * exp(-1/(1-s^2)) on (-1, 1), 0 outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = const * np.exp(-1.0 / (1.0 - si * si))
    return out


@lru_cache(maxsize=1)
def mollifier_constant():
    """Normalizer making the unit-width kernel integrate to one.

    Computed by adaptive Gauss-Kronrod quadrature of
    integral_{-1}^{1} exp(-1/(1-u^2)) du and inverting; the product
    constant * integral is 1 within 1e-12.
    """
    from scipy.integrate import quad
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        val, _ = quad(lambda u: np.exp(-1.0 / (1.0 - u * u)), -1.0, 1.0,
                      epsabs=1e-15, epsrel=1e-14, limit=200)
    return 1.0 / val


@lru_cache(maxsize=4)
def _moment_tables(n_panels=_N_PANELS):
    """Cumulative kernel moments M0(s), M1(s) at uniform panel edges.

    M0(s) = int_{-1}^{s} w1, M1(s) = int_{-1}^{s} u*w1(u) du, tabulated
    so that both can be evaluated anywhere by one local Gauss-Legendre
    panel from the nearest edge.
    """
    const = mollifier_constant()
    edges = np.linspace(-1.0, 1.0, n_panels + 1)
    nodes, weights = _gl_rule()
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = _bump(pts, const)
    m0 = np.concatenate(([0.0], np.cumsum((vals * weights).sum(axis=1) * half)))
    m1 = np.concatenate(([0.0], np.cumsum((vals * pts * weights).sum(axis=1) * half)))
    return edges, m0, m1


def _moments(s, edges, m0c, m1c, const):
    """Vectorized (M0(s), M1(s)) for s clipped to [-1, 1]."""
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    n_panels = len(edges) - 1
    width = 2.0 / n_panels
    idx = np.clip(((s + 1.0) / width).astype(int), 0, n_panels - 1)
    base = edges[idx]
    nodes, weights = _gl_rule()
    mid = 0.5 * (base + s)
    half = 0.5 * (s - base)
    pts = mid[..., None] + half[..., None] * nodes
    vals = _bump(pts, const)
    m0 = m0c[idx] + (vals * weights).sum(axis=-1) * half
    m1 = m1c[idx] + (vals * pts * weights).sum(axis=-1) * half
    return m0, m1


@dataclass(frozen=True)
class BetaGraph:
    """Validated enthalpy graph in knot/slope form.

    knots is the ascending union of all branch breakpoints; piece p
    covers (knots[p-1], knots[p]) with constant slope slopes[p] (pieces
    0 and K extend to -inf/+inf).  vals_left/vals_right are the graph
    limits at each knot with the cumulative latent-heat jumps baked in;
    they differ exactly by the jump at phase-transition knots.
    """
    phase_temps: np.ndarray
    jumps: np.ndarray
    knots: np.ndarray
    vals_left: np.ndarray
    vals_right: np.ndarray
    slopes: np.ndarray
    slope_lo: float
    slope_hi: float

    def beta_eval(self, v):
        """Graph value at scalar v: a float away from the phase
        temperatures, the closed interval (lo, hi) tuple at one."""
        j = np.searchsorted(self.phase_temps, v)
        if j < len(self.phase_temps) and self.phase_temps[j] == v:
            k = int(np.searchsorted(self.knots, v))
            return (float(self.vals_left[k]), float(self.vals_right[k]))
        return float(self._values(np.asarray([v]))[0])

    def _values(self, v):
        """Single-valued branch evaluation (right limits at knots)."""
        v = np.asarray(v, dtype=float)
        p = np.searchsorted(self.knots, v, side="right")
        out = np.empty_like(v)
        left = p == 0
        out[left] = self.vals_left[0] + self.slopes[0] * (v[left] - self.knots[0])
        rest = ~left
        pr = p[rest] - 1
        out[rest] = self.vals_right[pr] + self.slopes[pr + 1] * (v[rest] - self.knots[pr])
        return out


def build_graph(phase_temps, jumps, branches, slope_lo, slope_hi):
    """Assemble and validate a BetaGraph.

    Parameters
    ----------
    phase_temps : sequence of float
        Strictly ascending transition temperatures (may be empty).
    jumps : sequence of float
        Positive latent-heat jumps, one per transition temperature.
    branches : sequence of point lists
        J+1 branches, each a list of (v, value) pairs with at least two
        points, ascending in v.  Interior branches must start/end at
        their phase temperatures; the end branches extend linearly
        beyond their outermost segment.  Branch values are given
        without the cumulative jumps (those are added here).
    slope_lo, slope_hi : float
        Common bounds for every linear piece's slope, 0 < lo <= hi.
    """
    temps = np.asarray(phase_temps, dtype=float).reshape(-1)
    nu = np.asarray(jumps, dtype=float).reshape(-1)
    if len(nu) != len(temps):
        raise BetaGraphError("need exactly one jump per phase temperature")
    if len(temps) > 1 and not np.all(np.diff(temps) > 0):
        raise BetaGraphError("phase temperatures must be strictly ascending")
    if np.any(nu <= 0):
        raise BetaGraphError("latent-heat jumps must be positive")
    if not (0 < slope_lo <= slope_hi):
        raise BetaGraphError("slope bounds must satisfy 0 < slope_lo <= slope_hi")
    if len(branches) != len(temps) + 1:
        raise BetaGraphError(f"expected {len(temps) + 1} branches, got {len(branches)}")

    tol = 1e-9
    cleaned = []
    for bi, pts in enumerate(branches):
        pts = [(float(r), float(val)) for r, val in pts]
        if len(pts) < 2:
            raise BetaGraphError(f"branch {bi + 1} needs at least two points")
        rs = np.array([p[0] for p in pts])
        if not np.all(np.diff(rs) > 0):
            raise BetaGraphError(f"branch {bi + 1} breakpoints must be ascending")
        if bi > 0 and abs(rs[0] - temps[bi - 1]) > tol * max(1.0, abs(temps[bi - 1])):
            raise BetaGraphError(f"branch {bi + 1} must start at phase temperature {temps[bi - 1]}")
        if bi < len(temps) and abs(rs[-1] - temps[bi]) > tol * max(1.0, abs(temps[bi])):
            raise BetaGraphError(f"branch {bi + 1} must end at phase temperature {temps[bi]}")
        cleaned.append(pts)

    for bi in range(len(temps)):
        v_left = cleaned[bi][-1][1]
        v_right = cleaned[bi + 1][0][1]
        if abs(v_left - v_right) > tol * max(1.0, abs(v_left)):
            raise BetaGraphError(
                f"branch values must be continuous across phase temperature "
                f"{temps[bi]}: {v_left} != {v_right}")

    slope_eps = 1e-12 * max(1.0, slope_hi)
    offsets = np.concatenate(([0.0], np.cumsum(nu)))
    knots, vals_left, vals_right, slopes = [], [], [], []
    for bi, pts in enumerate(cleaned):
        off = offsets[bi]
        for (r0, f0), (r1, f1) in zip(pts[:-1], pts[1:]):
            slope = (f1 - f0) / (r1 - r0)
            if slope < slope_lo - slope_eps or slope > slope_hi + slope_eps:
                raise BetaGraphError(
                    f"branch {bi + 1} slope {slope} outside [{slope_lo}, {slope_hi}]")
        for pi, (r, val) in enumerate(pts):
            if bi > 0 and pi == 0:
                continue  # knot already recorded from the previous branch
            knots.append(r)
            vals_left.append(val + off)
            is_phase = bi < len(temps) and pi == len(pts) - 1
            vals_right.append(val + off + (nu[bi] if is_phase else 0.0))
        # slopes for this branch's segments, plus the unbounded extensions
        seg = [(pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0])
               for i in range(len(pts) - 1)]
        if bi == 0:
            slopes.append(seg[0])  # extension to -inf
        slopes.extend(seg)
    slopes.append(slopes[-1])  # extension to +inf

    knots = np.asarray(knots)
    if len(knots) > 1 and not np.all(np.diff(knots) > 0):
        raise BetaGraphError("branch breakpoints overlap across branches")
    return BetaGraph(
        phase_temps=temps, jumps=nu, knots=knots,
        vals_left=np.asarray(vals_left), vals_right=np.asarray(vals_right),
        slopes=np.asarray(slopes), slope_lo=float(slope_lo), slope_hi=float(slope_hi))


class SmoothedBeta:
    """Mollified enthalpy bn and its derivative for a fixed index n.

    The smoothing index defaults to the solver's time-grid index but
    can be chosen independently.  Evaluation is exact up to the kernel
    moment tables (machine precision) and is vectorized over numpy
    arrays; immutable after construction, safe for concurrent use.
    """

    def __init__(self, graph, n, n_panels=_N_PANELS):
        if n < 1:
            raise ValueError("mollification index must be >= 1")
        self.graph = graph
        self.n = int(n)
        self.constant = mollifier_constant()
        self.n_panels = int(n_panels)
        self._edges, self._m0c, self._m1c = _moment_tables(self.n_panels)

    def kernel(self, d):
        """Scaled kernel w_n(d), compactly supported on |d| < 1/n."""
        return self.n * _bump(np.asarray(d, dtype=float) * self.n, self.constant)

    def _pieces(self):
        g = self.graph
        ranges = []
        lo = -np.inf
        for k in range(len(g.knots) + 1):
            hi = g.knots[k] if k < len(g.knots) else np.inf
            if k == 0:
                anchor_y, anchor_v = g.knots[0], g.vals_left[0]
            else:
                anchor_y, anchor_v = g.knots[k - 1], g.vals_right[k - 1]
            ranges.append((lo, hi, anchor_y, anchor_v, g.slopes[k]))
            lo = hi
        return ranges

    def bn(self, v):
        """Mollified enthalpy; exact where beta is linear on the window."""
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        n = self.n
        out = np.zeros_like(v)
        for y_lo, y_hi, ay, av, slope in self._pieces():
            # window [v - 1/n, v + 1/n] intersected with the piece, in
            # kernel coordinates s = n (v - y), descending in y
            s_lo = np.maximum(n * (v - y_hi), -1.0)
            s_hi = np.minimum(n * (v - y_lo), 1.0)
            live = s_hi > s_lo
            if not np.any(live):
                continue
            m0a, m1a = _moments(s_lo[live], self._edges, self._m0c, self._m1c, self.constant)
            m0b, m1b = _moments(s_hi[live], self._edges, self._m0c, self._m1c, self.constant)
            const_part = av + slope * (v[live] - ay)
            out[live] += const_part * (m0b - m0a) - (slope / n) * (m1b - m1a)
        return out[0] if scalar else out

    def bn_deriv(self, v):
        """Derivative of bn; at least slope_lo everywhere."""
        v = np.asarray(v, dtype=float)
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        n = self.n
        out = np.zeros_like(v)
        for y_lo, y_hi, _, _, slope in self._pieces():
            s_lo = np.maximum(n * (v - y_hi), -1.0)
            s_hi = np.minimum(n * (v - y_lo), 1.0)
            live = s_hi > s_lo
            if not np.any(live):
                continue
            m0a, _ = _moments(s_lo[live], self._edges, self._m0c, self._m1c, self.constant)
            m0b, _ = _moments(s_hi[live], self._edges, self._m0c, self._m1c, self.constant)
            out[live] += slope * (m0b - m0a)
        g = self.graph
        for vj, nu in zip(g.phase_temps, g.jumps):
            out += nu * self.kernel(v - vj)
        return out[0] if scalar else out

    def tables(self):
        """Flat float64 pack consumed by the compiled solver kernels."""
        g = self.graph
        return (
            g.knots.astype(np.float64),
            g.vals_right.astype(np.float64),
            float(g.vals_left[0]),
            g.slopes.astype(np.float64),
            g.phase_temps.astype(np.float64),
            g.jumps.astype(np.float64),
            float(self.n),
            float(self.constant),
            self._edges, self._m0c, self._m1c,
            _gl_rule()[0], _gl_rule()[1],
        )
