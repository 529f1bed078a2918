"""Interpolation of discrete states, estimate diagnostics, weak-form
residuals, grid-refinement studies, and the exact two-phase benchmark.

Three interpolants are defined from a state matrix v_i(k): the cellwise
constant one (value v_i(k) on [x_i, x_{i+1}) x (t_{k-1}, t_k]), the
space-linear one (linear in x at each level k, constant on the slab),
and the space-time bilinear one, which is continuous on the closed
domain and matches the nodes exactly.

The uniform-boundedness and energy estimates are monitored through the
ratio diagnostics linf_ratio and energy_norm; both are pure functions
of the state.  weak_residual measures how far the interpolants are
from satisfying the continuous weak formulation with a given smooth
test function vanishing at the final time - it shrinks under grid
refinement.  weak_identity_residual assembles the same identity with
the test function sampled at the nodes, which telescopes the per-step
weak identities and therefore stays at solver tolerance on any grid.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erf, erfc

from .beta import SmoothedBeta, build_graph
from .control import (DiscreteControl, PiecewiseLinearControl, discrete_norm,
                      fn_w21_norm, pl_w21_norm, pn_map, qn_map)
from .forward import SolveOptions, control_to_slab_values, solve_forward
from .grid import ProblemData, average_data, make_grid, sup_norms
from .objective import DiscreteProblem, OptimizeOptions, average_targets, cost, optimize

__all__ = [
    "Interpolant", "EnergyBreakdown", "DataNorms", "ConvergenceTable",
    "LevelResult", "ProblemSetup", "NeumannSolution",
    "interpolate", "energy_norm", "linf_ratio", "data_norm_bundle",
    "weak_residual", "weak_identity_residual", "l2_distance",
    "l2_distance_to_fn", "refine_study", "neumann_oracle", "free_boundary",
]

_GL3 = leggauss(3)
_GL5 = leggauss(5)


# --- interpolation ----------------------------------------------------

@dataclass(frozen=True)
class Interpolant:
    """Evaluable interpolant of a discrete state.

    kind is 'tilde' (cellwise constant), 'vtau' (space-linear per time
    slab) or 'bilinear' (continuous space-time).  Cells are half-open
    with the far boundary closed; evaluation outside the domain raises.
    """
    kind: str
    v: np.ndarray = field(repr=False)
    grid: object

    def __call__(self, x, t):
        g = self.grid
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(x < -1e-12) or np.any(x > g.ell * (1 + 1e-12)) \
                or np.any(t < -1e-12) or np.any(t > g.T * (1 + 1e-12)):
            raise ValueError("evaluation outside the space-time domain")
        x, t = np.broadcast_arrays(x, t)
        i = np.clip(np.searchsorted(g.xs, x, side="right") - 1, 0, g.m - 1)
        k = np.clip(np.searchsorted(g.ts, t, side="left"), 0, g.n)
        if self.kind == "tilde":
            return self.v[k, i]
        if self.kind == "vtau":
            w = (x - g.xs[i]) / g.h
            return self.v[k, i] * (1 - w) + self.v[k, i + 1] * w
        if self.kind == "bilinear":
            kb = np.maximum(k, 1)
            w = (x - g.xs[i]) / g.h
            lo = self.v[kb - 1, i] * (1 - w) + self.v[kb - 1, i + 1] * w
            hi = self.v[kb, i] * (1 - w) + self.v[kb, i + 1] * w
            s = (t - g.ts[kb - 1]) / g.tau
            return lo * (1 - s) + hi * s
        raise ValueError(f"unknown interpolant kind '{self.kind}'")


def interpolate(state, grid, kind="bilinear"):
    if kind not in ("tilde", "vtau", "bilinear"):
        raise ValueError(f"unknown interpolant kind '{kind}'")
    return Interpolant(kind=kind, v=state.v, grid=grid)


# --- diagnostics ------------------------------------------------------

@dataclass(frozen=True)
class EnergyBreakdown:
    """The three sums of the discrete energy seminorm and their total."""
    term1: float  # time differences
    term2: float  # largest spatial-gradient level
    term3: float  # mixed differences (weighted by tau^2)

    @property
    def total(self):
        return self.term1 + self.term2 + self.term3


def energy_norm(state, grid):
    v = state.v
    h, tau = grid.h, grid.tau
    vt = np.diff(v, axis=0) / tau            # rows k = 1..n
    vx = np.diff(v, axis=1) / h              # all levels
    vxt = np.diff(vx, axis=0) / tau
    term1 = float(tau * h * (vt[:, :-1] ** 2).sum())
    term2 = float(h * (vx[1:] ** 2).sum(axis=1).max()) if grid.n >= 1 else 0.0
    term3 = float(tau ** 2 * h * (vxt ** 2).sum())
    return EnergyBreakdown(term1=term1, term2=term2, term3=term3)


@dataclass(frozen=True)
class DataNorms:
    """Sup and Sobolev norms of the data entering the a priori bounds."""
    f_sup: float
    p_sup: float
    g_sup: float
    phi_sup: float
    phi_w21: float
    p_w21: float
    g_w21: float

    @property
    def linf_denominator(self):
        return self.f_sup + self.p_sup + self.g_sup + self.phi_sup

    @property
    def energy_denominator(self):
        return self.phi_w21 ** 2 + self.f_sup ** 2 + self.p_w21 ** 2 + self.g_w21 ** 2


def data_norm_bundle(data, grid, gn_pl):
    sups = sup_norms(data, grid)
    return DataNorms(
        f_sup=sups["f"], p_sup=sups["p"],
        g_sup=float(np.abs(gn_pl.values).max()), phi_sup=sups["phi"],
        phi_w21=fn_w21_norm(data.phi, grid.ell),
        p_w21=fn_w21_norm(data.p, grid.T),
        g_w21=pl_w21_norm(gn_pl))


def linf_ratio(state, norms):
    """Sup of the state over the sum of the data sup norms."""
    den = norms.linf_denominator
    if den == 0.0:
        raise ValueError("all-zero data: the uniform-bound ratio is undefined")
    return float(np.abs(state.v).max() / den)


# --- weak-form residuals ---------------------------------------------

def _fd_partials(psi, ell, T):
    hx = 1e-7 * max(1.0, ell)
    ht = 1e-7 * max(1.0, T)

    def psi_x(x, t):
        lo = np.clip(x - hx, 0.0, ell)
        hi = np.clip(x + hx, 0.0, ell)
        return (psi(hi, t) - psi(lo, t)) / (hi - lo)

    def psi_t(x, t):
        lo = np.clip(t - ht, 0.0, T)
        hi = np.clip(t + ht, 0.0, T)
        return (psi(x, hi) - psi(x, lo)) / (hi - lo)

    return psi_x, psi_t


def weak_residual(state, data, avg, gn_pl, sb, grid, psi, psi_x=None, psi_t=None):
    """Defect of the interpolants in the continuous weak formulation.

    Assembles, with 5x5 Gauss-Legendre cell quadrature,

        int int [ -bn(v~) psi_t + a vx^tau psi_x + b v~ psi_x
                  + c v~ psi - f psi ]
        - int bn(phi~) psi(x, 0) - int p psi(ell, .) + int g^n psi(0, .)

    where v~ and vx^tau are the cellwise-constant interpolants and
    phi~ the averaged initial data.  psi must vanish at t = T (checked
    by sampling); missing partials are approximated by central
    differences.  The value shrinks under grid refinement.
    """
    g = grid
    xs_check = np.linspace(0.0, g.ell, 4 * g.m + 1)
    if np.abs(np.asarray(psi(xs_check, np.full_like(xs_check, g.T)), dtype=float)).max() > 1e-10:
        raise ValueError("test function must vanish at the final time")
    if psi_x is None or psi_t is None:
        fx, ft = _fd_partials(psi, g.ell, g.T)
        psi_x = psi_x or fx
        psi_t = psi_t or ft

    nodes, weights = _GL5
    v = state.v
    bn_cell = sb.bn(v[1:, :-1])                     # (n, m): bn(v_i(k)) on slab k
    vx_cell = np.diff(v[1:], axis=1) / g.h          # (n, m)
    v_cell = v[1:, :-1]

    xm = 0.5 * (g.xs[:-1] + g.xs[1:])
    tm = 0.5 * (g.ts[:-1] + g.ts[1:])
    X = (xm[:, None] + 0.5 * g.h * nodes[None, :])[None, :, None, :]
    Tt = (tm[:, None] + 0.5 * g.tau * nodes[None, :])[:, None, :, None]

    def at_pts(fn):
        vals = np.asarray(fn(X, Tt), dtype=float)
        return np.broadcast_to(vals, (g.n, g.m, len(nodes), len(nodes)))

    P = at_pts(psi)
    Px = at_pts(psi_x)
    Pt = at_pts(psi_t)
    integrand = (-bn_cell[:, :, None, None] * Pt
                 + at_pts(data.a) * vx_cell[:, :, None, None] * Px
                 + at_pts(data.b) * v_cell[:, :, None, None] * Px
                 + at_pts(data.c) * v_cell[:, :, None, None] * P
                 - at_pts(data.f) * P)
    total = float((integrand * weights[None, None, :, None]
                   * weights[None, None, None, :]).sum() * (0.25 * g.h * g.tau))

    # initial term: bn of the averaged data against psi(x, 0)
    bn_phi = sb.bn(avg.phi[:-1])
    Xi = xm[:, None] + 0.5 * g.h * nodes[None, :]
    Pi = np.broadcast_to(np.asarray(psi(Xi, np.zeros_like(Xi)), dtype=float), Xi.shape)
    total -= float((bn_phi[:, None] * Pi * weights[None, :]).sum() * 0.5 * g.h)

    # boundary terms
    Tb = tm[:, None] + 0.5 * g.tau * nodes[None, :]
    p_vals = np.broadcast_to(np.asarray(data.p(Tb), dtype=float), Tb.shape)
    psi_ell = np.broadcast_to(np.asarray(psi(np.full_like(Tb, g.ell), Tb), dtype=float), Tb.shape)
    psi_0 = np.broadcast_to(np.asarray(psi(np.zeros_like(Tb), Tb), dtype=float), Tb.shape)
    g_vals = gn_pl(Tb)
    total -= float((p_vals * psi_ell * weights[None, :]).sum() * 0.5 * g.tau)
    total += float((g_vals * psi_0 * weights[None, :]).sum() * 0.5 * g.tau)
    return total


def weak_identity_residual(state, avg, sb, grid, g_slab, psi):
    """The weak identity summed over all slabs with the test function
    sampled at the nodes: eta_i = tau * psi(x_i, t_k).

    This telescopes the per-step identities, so for a solved state it
    vanishes to solver tolerance regardless of the grid or psi.
    """
    g = grid
    P = np.asarray(psi(g.xs[None, :], g.ts[:, None]), dtype=float)
    P = np.broadcast_to(P, (g.n + 1, g.m + 1))
    Px = np.diff(P, axis=1) / g.h                   # (n+1, m)
    v = state.v
    bn_v = sb.bn(v[:, :-1])                          # (n+1, m)
    bdt = np.diff(bn_v, axis=0) / g.tau              # (n, m), slab k = row k-1
    vx = np.diff(v, axis=1) / g.h
    total = 0.0
    for k in range(1, g.n + 1):
        a_k, b_k, c_k, f_k = avg.row(k)
        inner = (bdt[k - 1] * P[k, :-1] + a_k * vx[k] * Px[k]
                 + b_k * v[k, :-1] * Px[k] + c_k * v[k, :-1] * P[k, :-1]
                 - f_k * P[k, :-1])
        total += g.tau * (g.h * inner.sum() - avg.p[k] * P[k, -1]
                          + g_slab[k - 1] * P[k, 0])
    return float(total)


# --- L2 distances ------------------------------------------------------

def l2_distance(interp_a, interp_b):
    """Exact L2(D) distance between interpolants of (possibly) different
    grids, by Gauss-Legendre on the union grid (degree-exact for the
    piecewise-bilinear differences)."""
    ga, gb = interp_a.grid, interp_b.grid
    if abs(ga.ell - gb.ell) > 1e-12 or abs(ga.T - gb.T) > 1e-12:
        raise ValueError("interpolants live on different domains")
    xs = np.union1d(ga.xs, gb.xs)
    ts = np.union1d(ga.ts, gb.ts)
    nodes, weights = _GL3
    xm = 0.5 * (xs[:-1] + xs[1:])
    xh = 0.5 * np.diff(xs)
    tm = 0.5 * (ts[:-1] + ts[1:])
    th = 0.5 * np.diff(ts)
    X = (xm[:, None] + xh[:, None] * nodes[None, :])[None, :, None, :]
    Tt = (tm[:, None] + th[:, None] * nodes[None, :])[:, None, :, None]
    Xb, Tb = np.broadcast_arrays(X, Tt)
    diff = interp_a(Xb, Tb) - interp_b(Xb, Tb)
    w2 = weights[None, None, :, None] * weights[None, None, None, :]
    cellwise = (diff ** 2 * w2).sum(axis=(-2, -1)) * (xh[None, :] * th[:, None])
    return float(np.sqrt(cellwise.sum()))


def l2_distance_to_fn(interp, fn, subdivide=2):
    """L2(D) distance between an interpolant and a smooth function,
    with 5-point Gauss panels on subdivided interpolant cells."""
    g = interp.grid
    nodes, weights = _GL5
    xs = np.linspace(0.0, g.ell, subdivide * g.m + 1)
    ts = np.linspace(0.0, g.T, subdivide * g.n + 1)
    xm = 0.5 * (xs[:-1] + xs[1:])
    xh = 0.5 * np.diff(xs)
    tm = 0.5 * (ts[:-1] + ts[1:])
    th = 0.5 * np.diff(ts)
    X = (xm[:, None] + xh[:, None] * nodes[None, :])[None, :, None, :]
    Tt = (tm[:, None] + th[:, None] * nodes[None, :])[:, None, :, None]
    Xb, Tb = np.broadcast_arrays(X, Tt)
    diff = interp(Xb, Tb) - np.asarray(fn(Xb, Tb), dtype=float)
    w2 = weights[None, None, :, None] * weights[None, None, None, :]
    cellwise = (diff ** 2 * w2).sum(axis=(-2, -1)) * (xh[None, :] * th[:, None])
    return float(np.sqrt(cellwise.sum()))


# --- refinement studies -----------------------------------------------

@dataclass(frozen=True)
class ProblemSetup:
    """Continuous problem description for a refinement study."""
    data: ProblemData
    graph: object
    control: object = None          # continuous control g(t) for forward mode
    moll_n: int | None = None       # decouple the smoothing index if set
    nodal_targets: bool = False


@dataclass
class LevelResult:
    m: int
    n: int
    cost: float = np.nan
    linf_ratio: float = np.nan
    energy_total: float = np.nan
    energy_ratio: float = np.nan
    dist_to_next: float = np.nan
    wall_time: float = np.nan
    max_sweeps: int = 0
    error: str | None = None
    control: object = None
    interp: object = None
    history: object = None


@dataclass
class ConvergenceTable:
    mode: str
    rows: list

    CSV_COLUMNS = ("m", "n", "cost", "linf_ratio", "energy_total",
                   "energy_ratio", "dist_to_next", "max_sweeps", "error")

    def csv_rows(self):
        out = []
        for r in self.rows:
            out.append((r.m, r.n, r.cost, r.linf_ratio, r.energy_total,
                        r.energy_ratio, r.dist_to_next, r.max_sweeps,
                        r.error or ""))
        return out


def _run_level(setup, m, n, mode, solve_opts, opt_opts):
    t0 = time.perf_counter()
    row = LevelResult(m=m, n=n)
    try:
        grid = make_grid(setup.data, setup.graph, m, n)
        avg = average_data(setup.data, grid)
        sb = SmoothedBeta(setup.graph, setup.moll_n if setup.moll_n else n)
        targets = average_targets(setup.data.omega, grid, setup.nodal_targets)
        if mode == "forward":
            if setup.control is None:
                gd = DiscreteControl(g=np.zeros(n + 1), tau=grid.tau)
            else:
                gd = qn_map(setup.control, grid)
            state, rep = solve_forward(gd, avg, sb, grid, solve_opts)
            row.cost = cost(state, targets, grid)
            row.max_sweeps = rep.max_sweeps_per_step
        elif mode == "optimize":
            problem = DiscreteProblem(avg=avg, sb=sb, grid=grid, targets=targets,
                                      R=setup.data.R, solve_opts=solve_opts)
            res = optimize(problem, setup.data.R, opt_opts or OptimizeOptions())
            gd = res.control
            state, rep = solve_forward(gd, avg, sb, grid, solve_opts)
            row.cost = res.cost
            row.max_sweeps = rep.max_sweeps_per_step
            row.history = res.history
        else:
            raise ValueError(f"unknown study mode '{mode}'")
        gn_pl = pn_map(gd)
        norms = data_norm_bundle(setup.data, grid, gn_pl)
        energy = energy_norm(state, grid)
        row.linf_ratio = linf_ratio(state, norms)
        row.energy_total = energy.total
        row.energy_ratio = energy.total / norms.energy_denominator \
            if norms.energy_denominator > 0 else np.nan
        row.control = gd
        row.interp = interpolate(state, grid, "bilinear")
    except Exception as exc:  # record and continue with the other levels
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_time = time.perf_counter() - t0
    return row


def refine_study(setup, levels, mode="forward", solve_opts=SolveOptions(),
                 opt_opts=None, threads=1):
    """Run the per-level solves/optimizations and collect diagnostics.

    levels must be ascending (m, n) pairs satisfying the mesh
    condition.  Per-level failures are recorded in the table and the
    study continues.  dist_to_next holds the exact L2(D) distance
    between the bilinear interpolants of consecutive levels.
    """
    levels = list(levels)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda mn: _run_level(setup, mn[0], mn[1], mode, solve_opts, opt_opts),
                levels))
    else:
        rows = [_run_level(setup, m, n, mode, solve_opts, opt_opts)
                for (m, n) in levels]
    for j in range(len(rows) - 1):
        if rows[j].interp is not None and rows[j + 1].interp is not None:
            rows[j].dist_to_next = l2_distance(rows[j].interp, rows[j + 1].interp)
    return ConvergenceTable(mode=mode, rows=rows)


# --- two-phase similarity benchmark -----------------------------------

@dataclass(frozen=True)
class NeumannSolution:
    """Exact two-phase melting solution with front X(t) = 2 alpha sqrt(t).

    The physical clock is shifted by t0 > 0 so all boundary data are
    smooth on the solver's interval [0, T]; solver time t corresponds
    to similarity time t + t0.  The hot phase (above v1) occupies
    x < X, the cold phase x > X; conduction is normalized so the flux
    is the plain gradient and each phase's enthalpy slope is the
    reciprocal of its diffusivity.
    """
    alpha: float
    kappa_hot: float
    kappa_cold: float
    latent: float
    v1: float
    v_hot: float
    v_cold: float
    t0: float

    def front(self, t):
        return 2.0 * self.alpha * np.sqrt(np.asarray(t, dtype=float) + self.t0)

    def value(self, x, t):
        x = np.asarray(x, dtype=float)
        ta = np.asarray(t, dtype=float) + self.t0
        x, ta = np.broadcast_arrays(x, ta)
        u_h = self.v_hot - self.v1
        u_c = self.v_cold - self.v1
        A = u_h / erf(self.alpha / np.sqrt(self.kappa_hot))
        B = -u_c / erfc(self.alpha / np.sqrt(self.kappa_cold))
        hot = self.v1 + u_h - A * erf(x / (2.0 * np.sqrt(self.kappa_hot * ta)))
        cold = self.v1 + u_c + B * erfc(x / (2.0 * np.sqrt(self.kappa_cold * ta)))
        return np.where(x <= 2.0 * self.alpha * np.sqrt(ta), hot, cold)

    def flux_left(self, t):
        ta = np.asarray(t, dtype=float) + self.t0
        A = (self.v_hot - self.v1) / erf(self.alpha / np.sqrt(self.kappa_hot))
        return -A / np.sqrt(np.pi * self.kappa_hot * ta)

    def flux_at(self, x, t):
        ta = np.asarray(t, dtype=float) + self.t0
        X = 2.0 * self.alpha * np.sqrt(ta)
        A = (self.v_hot - self.v1) / erf(self.alpha / np.sqrt(self.kappa_hot))
        B = -(self.v_cold - self.v1) / erfc(self.alpha / np.sqrt(self.kappa_cold))
        hot = -A * np.exp(-x ** 2 / (4.0 * self.kappa_hot * ta)) \
            / np.sqrt(np.pi * self.kappa_hot * ta)
        cold = -B * np.exp(-x ** 2 / (4.0 * self.kappa_cold * ta)) \
            / np.sqrt(np.pi * self.kappa_cold * ta)
        return np.where(np.asarray(x, dtype=float) <= X, hot, cold)

    def graph(self, width=None):
        """Matching enthalpy graph (slopes 1/kappa, jump = latent heat)."""
        s_c = 1.0 / self.kappa_cold
        s_h = 1.0 / self.kappa_hot
        if width is None:
            width = 10.0 + 2.0 * (abs(self.v_hot) + abs(self.v_cold) + abs(self.v1))
        v1 = self.v1
        branches = [[(v1 - width, -s_c * width), (v1, 0.0)],
                    [(v1, 0.0), (v1 + width, s_h * width)]]
        return build_graph([v1], [self.latent], branches,
                           min(s_c, s_h), max(s_c, s_h))

    def problem_data(self, ell, T, R=50.0):
        """ProblemData reproducing this solution on [0, ell] x [0, T]."""
        zero = lambda *args: np.zeros(np.broadcast_shapes(
            *[np.asarray(a, dtype=float).shape for a in args]))
        return ProblemData(
            a=lambda x, t: np.ones(np.broadcast_shapes(
                np.asarray(x, dtype=float).shape, np.asarray(t, dtype=float).shape)),
            b=zero, c=zero, f=zero,
            phi=lambda x: self.value(x, 0.0),
            p=lambda t: self.flux_at(ell, t),
            omega=lambda x: self.value(x, T),
            a0=1.0, ell=ell, T=T, R=R)


def neumann_oracle(kappa_hot, kappa_cold, latent, v1, v_hot, v_cold, t0=0.25):
    """Solve the similarity flux-balance equation and build the oracle.

    The balance (latent * alpha = cold-side gradient - hot-side
    gradient at the front, in similarity variables) is solved for
    alpha by bisection to 1e-12 on a geometrically expanded bracket;
    inconsistent phase data raise ValueError.
    """
    if not (v_hot > v1 > v_cold):
        raise ValueError("need v_hot > v1 > v_cold for a two-phase front")
    if latent <= 0 or kappa_hot <= 0 or kappa_cold <= 0 or t0 <= 0:
        raise ValueError("latent heat, diffusivities and t0 must be positive")
    u_h = v_hot - v1
    u_c = v_cold - v1
    sqh = np.sqrt(kappa_hot)
    sqc = np.sqrt(kappa_cold)

    def balance(alpha):
        hot = u_h * np.exp(-alpha ** 2 / kappa_hot) \
            / (np.sqrt(np.pi * kappa_hot) * erf(alpha / sqh))
        cold = u_c * np.exp(-alpha ** 2 / kappa_cold) \
            / (np.sqrt(np.pi * kappa_cold) * erfc(alpha / sqc))
        return hot + cold - latent * alpha

    lo = 1e-12
    if balance(lo) <= 0:
        raise ValueError("no front root: hot-side drive vanishes")
    hi = 1.0
    for _ in range(200):
        if balance(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ValueError("no front root: flux balance never changes sign")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if balance(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    alpha = 0.5 * (lo + hi)
    return NeumannSolution(alpha=float(alpha), kappa_hot=float(kappa_hot),
                           kappa_cold=float(kappa_cold), latent=float(latent),
                           v1=float(v1), v_hot=float(v_hot), v_cold=float(v_cold),
                           t0=float(t0))


def free_boundary(interp, t, level):
    """Crossings of the space-linear profile at time t with ``level``,
    by inverse linear interpolation; ordered left to right."""
    g = interp.grid
    w = interp(g.xs, np.full_like(g.xs, float(t)))
    d = w - level
    out = []
    for i in range(g.m):
        if d[i] == 0.0:
            out.append(float(g.xs[i]))
        elif d[i] * d[i + 1] < 0.0:
            out.append(float(g.xs[i] + g.h * d[i] / (d[i] - d[i + 1])))
    if d[g.m] == 0.0:
        out.append(float(g.xs[g.m]))
    return out
