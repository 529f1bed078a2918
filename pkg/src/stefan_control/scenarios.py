"""Canned problem setups used by the verification suite and the demos.

Each builder returns fully validated continuous problem descriptions;
the verification checks and acceptance-style experiments all run on
these, so the exact parameter choices are kept in one place.
"""

from __future__ import annotations

import numpy as np

from .analysis import ProblemSetup, neumann_oracle
from .beta import build_graph
from .expr import as_fn_t, as_fn_x, parse
from .grid import ProblemData

__all__ = [
    "identity_graph", "two_phase_graph", "constant_solution_setup",
    "two_phase_setup", "manufactured_setup", "recovery_setup",
    "neumann_setup",
]

PI = np.pi


def identity_graph():
    """Single-phase graph beta(v) = v (no jumps, unit slopes)."""
    return build_graph([], [], [[(0.0, 0.0), (1.0, 1.0)]], 1.0, 1.0)


def two_phase_graph(v1=0.0, latent=0.5, slope_cold=1.0, slope_hot=1.25, width=50.0):
    """Two-phase graph with a single transition temperature."""
    branches = [[(v1 - width, -slope_cold * width), (v1, 0.0)],
                [(v1, 0.0), (v1 + width, slope_hot * width)]]
    return build_graph([v1], [latent], branches,
                       min(slope_cold, slope_hot), max(slope_cold, slope_hot))


def constant_solution_setup(level=0.75, drift=0.4):
    """Problem whose exact discrete solution is the constant ``level``.

    With c = f = 0 and a drift constant in space, the constant state
    solves every row of the step system identically once the boundary
    data carry the drift: g = p = drift * level.  The variable
    diffusion coefficient exercises the averaging path without
    affecting the balance.
    """
    graph = two_phase_graph(v1=0.0, latent=1.0, slope_cold=1.0, slope_hot=1.0)
    bc = parse(f"{drift * level}")
    data = ProblemData(
        a=parse("1 + 0.25*sin(3*x + t)"), b=parse(f"{drift}"),
        c=parse("0"), f=parse("0"),
        phi=as_fn_x(parse(f"{level}")), p=as_fn_t(bc),
        omega=as_fn_x(parse(f"{level}")),
        a0=0.75, ell=1.0, T=1.0, R=10.0)
    return ProblemSetup(data=data, graph=graph, control=as_fn_t(bc))


def two_phase_setup():
    """Smooth two-phase benchmark used for the estimate diagnostics.

    The initial profile crosses the transition temperature, so both
    phases and a moving interface are present from the start.
    """
    graph = two_phase_graph(v1=0.0, latent=0.5, slope_cold=1.0, slope_hot=1.25)
    data = ProblemData(
        a=parse("1 + 0.2*sin(3.141592653589793*x)*cos(t)"),
        b=parse("0"),
        c=parse("0.2*(1 + x)"),
        f=parse("0.5*cos(2*t)"),
        phi=as_fn_x(parse("0.6 - 1.5*x")),
        p=as_fn_t(parse("-0.4")),
        omega=as_fn_x(parse("0")),
        a0=0.8, ell=1.0, T=0.5, R=10.0)
    control = as_fn_t(parse("0.8*sin(2*t) + 0.3"))
    return ProblemSetup(data=data, graph=graph, control=control)


def manufactured_setup():
    """Single-phase problem manufactured around v = exp(-t) sin(pi x).

    With the identity enthalpy and a = 1, b = c = 0, substituting the
    target solution fixes f = (pi^2 - 1) exp(-t) sin(pi x) and the
    boundary fluxes g = pi exp(-t), p = -pi exp(-t).
    """
    graph = identity_graph()
    pi2m1 = PI * PI - 1.0
    data = ProblemData(
        a=parse("1"), b=parse("0"), c=parse("0"),
        f=parse(f"{pi2m1!r}*exp(-t)*sin({PI!r}*x)"),
        phi=as_fn_x(parse(f"sin({PI!r}*x)")),
        p=as_fn_t(parse(f"{-PI!r}*exp(-t)")),
        omega=as_fn_x(parse(f"{float(np.exp(-1.0))!r}*sin({PI!r}*x)")),
        a0=1.0, ell=1.0, T=1.0, R=50.0)
    control = as_fn_t(parse(f"{PI!r}*exp(-t)"))

    def exact(x, t):
        return np.exp(-np.asarray(t, dtype=float)) * np.sin(PI * np.asarray(x, dtype=float))

    setup = ProblemSetup(data=data, graph=graph, control=control)
    return setup, exact


def recovery_setup(amplitude=0.6):
    """Flux-identification scenario: smooth true control, zero start.

    The target profile is generated by running the forward solver with
    the true control, so the optimizer's forward model is its own
    reference; the identity enthalpy keeps the control-to-state map
    linear and the scenario fast.
    """
    graph = identity_graph()
    data = ProblemData(
        a=parse("1"), b=parse("0"), c=parse("0"), f=parse("0"),
        phi=as_fn_x(parse("0")), p=as_fn_t(parse("0")),
        omega=as_fn_x(parse("0")),
        a0=1.0, ell=1.0, T=0.5, R=10.0)
    g_true = parse(f"{amplitude!r}*sin({2.0 * PI!r}*t/0.5)*t/0.5 + {amplitude!r}")
    return ProblemSetup(data=data, graph=graph, control=as_fn_t(g_true))


def neumann_setup(ell=1.0, T=None, t0=None, alpha_target=0.4):
    """Two-phase melting benchmark against the similarity solution.

    Parameters are chosen so the front starts around 0.35*ell and ends
    around 0.65*ell, keeping it well inside the domain on [0, T].
    """
    oracle = neumann_oracle(kappa_hot=1.0, kappa_cold=1.0, latent=0.8,
                            v1=0.0, v_hot=1.0, v_cold=-0.4, t0=1.0)
    a = oracle.alpha
    t_start = (0.35 * ell / (2.0 * a)) ** 2
    t_end = (0.65 * ell / (2.0 * a)) ** 2
    oracle = neumann_oracle(kappa_hot=1.0, kappa_cold=1.0, latent=0.8,
                            v1=0.0, v_hot=1.0, v_cold=-0.4, t0=t_start)
    horizon = t_end - t_start if T is None else T
    data = oracle.problem_data(ell=ell, T=horizon)
    setup = ProblemSetup(data=data, graph=oracle.graph(),
                         control=oracle.flux_left)
    return setup, oracle
