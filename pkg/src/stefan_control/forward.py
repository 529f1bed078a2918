"""Forward solver: the discrete state for a given discrete control.

Each time slab requires solving a nonlinear tridiagonal system whose
diagonal carries the mollified enthalpy.  The solver runs the
successive-approximation sweep proved to contract for this scheme:
rows 0..m-1 are solved as independent scalar equations with neighbors
frozen at the previous sweep, then the last (linear, boundary) row uses
the fresh value of its neighbor.  Sweeps stop when the sup-norm change
A_N falls below the step tolerance and the assembled system residual is
small; measured ratios A_N / A_{N-1} are recorded so contraction can be
checked against the coefficient-based bound (delta_theory).

The control enters through slab averages of its piecewise-linear
interpolant, which for a linear function are midpoint values:
g_k = (g_{k-1} + g_k)/2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import _advance_step, _solve_row

__all__ = [
    "SolveOptions", "StepReport", "SolverReport", "DiscreteState",
    "SolverError", "NonContractingError", "MaxSweepsExceededError", "BracketError",
    "scalar_solve", "solve_step", "solve_forward", "solve_forward_batch",
    "zeta", "residual_dsvsum", "delta_theory", "control_to_slab_values",
]


@dataclass(frozen=True)
class SolveOptions:
    """Per-step iteration controls.

    fp_tol of None means 1e-12 * (1 + ||v_prev||_inf), refreshed per
    step.  residual_tol bounds the max absolute residual of the
    assembled nonlinear system at acceptance.
    """
    fp_tol: float | None = None
    residual_tol: float = 1e-11
    max_sweeps: int = 10000
    patience: int = 10


@dataclass
class StepReport:
    k: int
    sweeps: int
    changes: np.ndarray = field(repr=False)
    final_change: float = np.nan
    max_residual: float = np.nan
    scalar_iters: int = 0
    status: int = 0

    @property
    def ratios(self):
        """A_N / A_{N-1} for N >= 2 (contraction must keep these < 1)."""
        a = self.changes
        if len(a) < 2:
            return np.empty(0)
        prev = a[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(prev > 0, a[1:] / prev, 0.0)
        return r

    @property
    def contracting(self):
        return bool(np.all(self.ratios < 1.0))


@dataclass
class SolverReport:
    steps: list
    wall_time: float = 0.0

    @property
    def total_sweeps(self):
        return int(sum(s.sweeps for s in self.steps))

    @property
    def total_scalar_iters(self):
        return int(sum(s.scalar_iters for s in self.steps))

    @property
    def max_sweeps_per_step(self):
        return max((s.sweeps for s in self.steps), default=0)

    @property
    def max_residual(self):
        return max((s.max_residual for s in self.steps), default=0.0)


@dataclass(frozen=True)
class DiscreteState:
    """State matrix v[k, i] for k = 0..n, i = 0..m on ``grid``."""
    v: np.ndarray
    grid: object


class SolverError(RuntimeError):
    def __init__(self, message, report=None, step=None):
        super().__init__(message)
        self.report = report
        self.step = step


class NonContractingError(SolverError):
    pass


class MaxSweepsExceededError(SolverError):
    pass


class BracketError(SolverError):
    pass


def scalar_solve(alpha, s, r, sb, x0=0.0):
    """Solve alpha*v + s*bn(v) = r for the unique root.

    Requires alpha + s*slope_lo > 0 (strict monotonicity); the residual
    at return is below 1e-13 * max(1, |r|) up to machine limits.
    """
    if s <= 0:
        raise ValueError("scalar_solve requires s > 0")
    if alpha + s * sb.graph.slope_lo <= 0:
        raise ValueError("alpha + s*slope_lo must be positive for a monotone row")
    tables = sb.tables()
    x, _ = _solve_row(alpha, s, r, float(x0), *tables, 1e-13)
    if np.isnan(x):
        raise BracketError("no sign-change bracket after 200 geometric expansions")
    return float(x)


def control_to_slab_values(gd):
    """Slab averages g_k of the piecewise-linear interpolant, k = 1..n."""
    g = gd.g
    return 0.5 * (g[:-1] + g[1:])


def _step_fp_tol(v_prev, opts):
    if opts.fp_tol is not None:
        return float(opts.fp_tol)
    return 1e-12 * (1.0 + float(np.abs(v_prev).max()))


def _raise_for_status(status, report, k, batch_index=None):
    where = f"step k={k}" + ("" if batch_index is None else f", batch member {batch_index}")
    if status == _kernels.NONCONTRACTING:
        raise NonContractingError(f"sweep ratios >= 1 persisted at {where}", report, k)
    if status == _kernels.MAX_SWEEPS:
        raise MaxSweepsExceededError(f"sweep/residual budget exhausted at {where}", report, k)
    if status == _kernels.BRACKET_FAIL:
        raise BracketError(f"scalar bracket expansion failed at {where}", report, k)


def solve_step(v_prev, k, avg, g_k, sb, grid, opts=SolveOptions(), v0=None):
    """Advance one time slab; returns (new row, StepReport).

    v_prev is row k-1; g_k the slab value of the control; v0 an
    optional sweep initialization (defaults to v_prev).
    """
    v_prev = np.asarray(v_prev, dtype=float)
    a_k, b_k, c_k, f_k = avg.row(k)
    start = v_prev if v0 is None else np.asarray(v0, dtype=float)
    tables = sb.tables()
    fp = np.array([_step_fp_tol(v_prev, opts)])
    ahist = np.empty((1, opts.max_sweeps))
    vnew, sweeps, status, resid, iters, achange = _advance_step(
        v_prev[None, :], start[None, :].copy(), np.array([float(g_k)]),
        float(avg.p[k]), a_k, b_k, c_k, f_k, grid.h, grid.tau, fp,
        opts.residual_tol, opts.max_sweeps, opts.patience, *tables, ahist, True)
    report = StepReport(k=k, sweeps=int(sweeps[0]),
                        changes=ahist[0, :int(sweeps[0])].copy(),
                        final_change=float(achange[0]),
                        max_residual=float(resid[0]),
                        scalar_iters=int(iters[0]), status=int(status[0]))
    _raise_for_status(int(status[0]), report, k)
    return vnew[0], report


def solve_forward(gd, avg, sb, grid, opts=SolveOptions(), warm_rows=None):
    """Full forward solve for a discrete control.

    Row 0 is the averaged initial data; rows 1..n come from solve_step
    with the control's slab values.  warm_rows (shape (n+1, m+1)) may
    supply sweep initializations from a nearby solved state: the fixed
    point per step is unique, so this changes only the sweep count.
    Returns (DiscreteState, SolverReport); failures carry the step
    index.
    """
    t0 = time.perf_counter()
    n, m = grid.n, grid.m
    if len(gd.g) != n + 1:
        raise ValueError(f"control has {len(gd.g)} entries, grid wants {n + 1}")
    v = np.empty((n + 1, m + 1))
    v[0] = avg.phi
    gslab = control_to_slab_values(gd)
    steps = []
    for k in range(1, n + 1):
        v0 = None if warm_rows is None else warm_rows[k]
        row, rep = solve_step(v[k - 1], k, avg, gslab[k - 1], sb, grid, opts, v0=v0)
        v[k] = row
        steps.append(rep)
    return DiscreteState(v=v, grid=grid), SolverReport(steps=steps,
                                                       wall_time=time.perf_counter() - t0)


def solve_forward_batch(G, avg, sb, grid, opts=SolveOptions(), warm_rows=None):
    """Forward solves for B controls at once (rows of G, shape (B, n+1)).

    Shared immutable data makes the batch members independent; they are
    swept together for speed.  warm_rows as in solve_forward (shared by
    all members).  Returns (V of shape (B, n+1, m+1), light report
    dict).  Raises on the first failing member, naming it.
    """
    t0 = time.perf_counter()
    G = np.asarray(G, dtype=float)
    B = G.shape[0]
    n, m = grid.n, grid.m
    if G.shape[1] != n + 1:
        raise ValueError(f"controls have {G.shape[1]} entries, grid wants {n + 1}")
    V = np.empty((B, n + 1, m + 1))
    V[:, 0, :] = avg.phi[None, :]
    gslab = 0.5 * (G[:, :-1] + G[:, 1:])
    tables = sb.tables()
    dummy = np.empty((B, 1))
    sweeps_per_step = np.zeros(n + 1, dtype=int)
    worst_residual = 0.0
    for k in range(1, n + 1):
        vprev = V[:, k - 1, :]
        fp = 1e-12 * (1.0 + np.abs(vprev).max(axis=1)) if opts.fp_tol is None \
            else np.full(B, float(opts.fp_tol))
        a_k, b_k, c_k, f_k = avg.row(k)
        start = vprev.copy() if warm_rows is None \
            else np.repeat(warm_rows[k][None, :], B, axis=0)
        vnew, sweeps, status, resid, _, _ = _advance_step(
            vprev, start, gslab[:, k - 1].copy(), float(avg.p[k]),
            a_k, b_k, c_k, f_k, grid.h, grid.tau, fp, opts.residual_tol,
            opts.max_sweeps, opts.patience, *tables, dummy, False)
        bad = np.nonzero(status != _kernels.OK)[0]
        if len(bad):
            _raise_for_status(int(status[bad[0]]), None, k, int(bad[0]))
        V[:, k, :] = vnew
        sweeps_per_step[k] = int(sweeps.max())
        worst_residual = max(worst_residual, float(np.nanmax(resid)))
    info = {"wall_time": time.perf_counter() - t0,
            "max_sweeps_per_step": int(sweeps_per_step.max()),
            "total_sweeps": int(sweeps_per_step.sum()),
            "max_residual": worst_residual}
    return V, info


def zeta(sb, v_new, v_old):
    """Discrete chain-rule factor between consecutive values of bn.

    Divided difference of bn when the arguments are separated, the
    derivative in the coincidence limit; equals the theta-integral of
    bn' by the fundamental theorem of calculus.
    """
    v_new = float(v_new)
    v_old = float(v_old)
    if abs(v_new - v_old) > 1e-12:
        return float((sb.bn(v_new) - sb.bn(v_old)) / (v_new - v_old))
    return float(sb.bn_deriv(v_new))


def residual_dsvsum(state, avg, sb, grid, k, g_k):
    """Residuals of the summed weak identity at slab k against every
    basis test vector, boundary terms included, with the enthalpy
    difference written through the zeta factor.

    g_k is the control's slab value entering the identity.
    """
    v = state.v
    h, tau, m = grid.h, grid.tau, grid.m
    a_k, b_k, c_k, f_k = avg.row(k)
    vk = v[k]
    vkm = v[k - 1]
    vt = (vk - vkm) / tau
    vx = np.diff(vk) / h
    zetas = np.array([zeta(sb, vk[i], vkm[i]) for i in range(m)])
    res = np.empty(m + 1)
    res[0] = h * (zetas[0] * vt[0] + c_k[0] * vk[0] - f_k[0]) \
        - a_k[0] * vx[0] - b_k[0] * vk[0] + float(g_k)
    for j in range(1, m):
        res[j] = h * (zetas[j] * vt[j] + c_k[j] * vk[j] - f_k[j]) \
            + a_k[j - 1] * vx[j - 1] - a_k[j] * vx[j] \
            + b_k[j - 1] * vk[j - 1] - b_k[j] * vk[j]
    res[m] = a_k[m - 1] * vx[m - 1] + b_k[m - 1] * vk[m - 1] - float(avg.p[k])
    return res


def delta_theory(avg, grid, k, slope_lo):
    """Coefficient-based contraction bound for slab k.

    The sweep's sup-change ratio is bounded by the largest of the
    per-row factors with the enthalpy divided difference replaced by
    its floor slope_lo; below 1 on admissible grids.
    """
    a_k, b_k, c_k, _ = avg.row(k)
    h, tau, m = grid.h, grid.tau, grid.m
    s = h * h / tau
    d0 = a_k[0] / (a_k[0] - h * b_k[0] + h * h * c_k[0] + s * slope_lo)
    out = d0
    dprev = d0
    for i in range(1, m):
        den = a_k[i - 1] + a_k[i] - h * b_k[i]
        di = den / (den + h * h * c_k[i] + s * slope_lo)
        out = max(out, di)
        dprev = di
    dm = (1.0 - h * b_k[m - 1] / a_k[m - 1]) * dprev
    return float(max(out, dm))
