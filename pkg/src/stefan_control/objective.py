"""Discrete cost functional and the feasible-control search.

The cost is the final-time mismatch  I = sum_{i=1..m} h (v_i(n) - w_i)^2
against averaged target data (node-based targets are supported through
a flag on average_targets).  Minimization over the control ball runs
projected-gradient descent with central-difference gradients; the
2(n+1) perturbed forward solves of one gradient are independent and are
executed as one batch.  The result is reported as an eps-minimizer with
eps equal to the last observed cost decrease.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .control import DiscreteControl, discrete_norm, project
from .forward import SolveOptions, solve_forward, solve_forward_batch
from .grid import steklov_space

__all__ = [
    "DiscreteProblem", "OptimizeOptions", "OptimizationResult",
    "cost", "average_targets", "fd_gradient", "optimize",
]


@dataclass(frozen=True)
class DiscreteProblem:
    """Everything a forward solve needs, plus the target profile.

    targets holds w_i for i = 0..m (index 0 is never used by the cost,
    which sums from i = 1 as the functional prescribes).
    """
    avg: object
    sb: object
    grid: object
    targets: np.ndarray
    R: float
    solve_opts: SolveOptions = field(default_factory=SolveOptions)


def average_targets(omega, grid, nodal=False):
    """Target vector from the measurement profile.

    By default omega is ingested exactly like the initial data (cell
    averages with the right endpoint pointwise); nodal=True samples at
    the nodes instead.
    """
    if nodal:
        return np.asarray(omega(grid.xs), dtype=float) * np.ones(grid.m + 1)
    return steklov_space(omega, grid)


def cost(state, targets, grid):
    """Final-time mismatch; the i = 0 node is excluded."""
    diff = state.v[grid.n, 1:] - np.asarray(targets, dtype=float)[1:]
    return float(grid.h * (diff ** 2).sum())


def _batch_cost(V, targets, grid):
    diff = V[:, grid.n, 1:] - np.asarray(targets, dtype=float)[None, 1:]
    return grid.h * (diff ** 2).sum(axis=1)


def fd_gradient(gd, problem, eps=None, warm_state=None):
    """Central-difference gradient of the cost in the control entries.

    Runs 2(n+1) forward solves as one batch; deterministic.  A solved
    state for gd may be passed as warm_state to initialize the sweeps
    of the nearby perturbed solves.  Solver failures carry the index of
    the offending perturbation.
    """
    g = gd.g
    n1 = len(g)
    if eps is None:
        eps = 1e-6 * (1.0 + discrete_norm(gd))
    G = np.repeat(g[None, :], 2 * n1, axis=0)
    idx = np.arange(n1)
    G[2 * idx, idx] += eps
    G[2 * idx + 1, idx] -= eps
    warm = None if warm_state is None else warm_state.v
    try:
        V, _ = solve_forward_batch(G, problem.avg, problem.sb, problem.grid,
                                   problem.solve_opts, warm_rows=warm)
    except Exception as exc:  # annotate with the perturbed coordinate if known
        raise type(exc)(f"{exc} (during fd_gradient batch)") from exc
    costs = _batch_cost(V, problem.targets, problem.grid)
    return (costs[0::2] - costs[1::2]) / (2.0 * eps), 2 * n1


@dataclass
class OptimizeOptions:
    tol: float = 1e-8
    max_iters: int = 200
    fd_epsilon: float | None = None
    initial: np.ndarray | None = None
    armijo_c1: float = 1e-4
    max_halvings: int = 30
    seed: int | None = None  # recorded for provenance; descent is deterministic


@dataclass
class OptimizationResult:
    control: DiscreteControl
    cost: float
    history: list  # (iteration, cost, step, norm) tuples
    termination: str
    forward_solves: int
    eps_n: float
    wall_time: float

    @property
    def costs(self):
        return np.array([row[1] for row in self.history])


def optimize(problem, R=None, opts=OptimizeOptions()):
    """Projected-gradient search for an eps-optimal control.

    Iterates g <- project(g - s * grad I, R) with Armijo backtracking
    (halve s until sufficient decrease, at most max_halvings times),
    starting from the zero control unless opts.initial says otherwise.
    Stops when the relative cost decrease stays below opts.tol for
    three consecutive iterations, or at the iteration cap.  Accepted
    iterates never increase the cost and always lie in the ball.
    """
    t0 = time.perf_counter()
    R = problem.R if R is None else float(R)
    grid = problem.grid
    g0 = np.zeros(grid.n + 1) if opts.initial is None else np.asarray(opts.initial, float)
    g = project(DiscreteControl(g=g0, tau=grid.tau), R)
    state, _ = solve_forward(g, problem.avg, problem.sb, grid, problem.solve_opts)
    solves = 1
    J = cost(state, problem.targets, grid)
    history = [(0, J, 0.0, discrete_norm(g))]
    step = 1.0
    small_streak = 0
    termination = "max_iters"
    eps_n = np.inf
    prev_g = None
    prev_grad = None
    for it in range(1, opts.max_iters + 1):
        grad, used = fd_gradient(g, problem, opts.fd_epsilon, warm_state=state)
        solves += used
        gnorm2 = float((grad ** 2).sum())
        if gnorm2 == 0.0:
            termination = "zero_gradient"
            break
        # spectral (Barzilai-Borwein) initial step, clamped to a relative
        # trust region of the previous accepted step so the Armijo
        # halvings can always recover; Armijo still guards every move
        if prev_grad is not None:
            dg = g.g - prev_g
            dy = grad - prev_grad
            denom = float(np.dot(dg, dy))
            scale = float(np.linalg.norm(dg) * np.linalg.norm(dy))
            if denom > 1e-12 * scale:
                bb = float(np.dot(dg, dg)) / denom
                step = min(max(bb, step * 1e-2), step * 1e2)
            else:
                step *= 2.0
        else:
            step = min(step * 2.0, 1e6 / max(np.sqrt(gnorm2), 1e-30))
        prev_g = g.g.copy()
        prev_grad = grad.copy()
        accepted = False
        for _ in range(opts.max_halvings + 1):
            trial = project(DiscreteControl(g=g.g - step * grad, tau=grid.tau), R)
            trial_state, _ = solve_forward(trial, problem.avg, problem.sb, grid,
                                           problem.solve_opts, warm_rows=state.v)
            solves += 1
            J_trial = cost(trial_state, problem.targets, grid)
            decrease_ref = float(np.dot(grad, g.g - trial.g))
            if J_trial <= J - opts.armijo_c1 * decrease_ref and J_trial <= J:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            termination = "line_search_stalled"
            break
        drop = J - J_trial
        eps_n = drop
        rel = drop / max(J, 1e-300)
        g, J, state = trial, J_trial, trial_state
        history.append((it, J, step, discrete_norm(g)))
        if rel < opts.tol:
            small_streak += 1
            if small_streak >= 3:
                termination = "converged"
                break
        else:
            small_streak = 0
    return OptimizationResult(control=g, cost=J, history=history,
                              termination=termination, forward_solves=solves,
                              eps_n=float(eps_n),
                              wall_time=time.perf_counter() - t0)
