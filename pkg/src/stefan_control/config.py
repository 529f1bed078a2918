"""Flat key = value configuration files describing a full problem.

The format is INI-style sections parsed with configparser; every field
that is a function of x and/or t is an expression in the grammar of
the expr module.  Branch point lists use colon pairs:

    [beta]
    phase_temps = 0.0
    jumps = 1.0
    slope_lo = 1.0
    slope_hi = 1.0
    branch_1 = -50:-50, 0:0
    branch_2 = 0:0, 50:50

See README for the full field reference.  Validation failures raise
ConfigError naming the violated precondition.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .beta import BetaGraphError, build_graph
from .expr import ExprSyntaxError, as_fn_t, as_fn_x, parse, variables
from .forward import SolveOptions
from .grid import ProblemData
from .objective import OptimizeOptions

__all__ = ["Config", "ConfigError", "load_config", "config_hash"]


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    data: ProblemData
    graph: object
    levels: list                       # [(m, n), ...]; single entry unless refine
    solve_opts: SolveOptions
    opt_opts: OptimizeOptions
    moll_n: int | None
    initial_control: object            # Expr, 'csv:PATH' string, or None
    nodal_targets: bool
    sha256: str
    psi: object = None                 # optional test function for verify
    raw: dict = field(default_factory=dict)


def config_hash(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _get(cp, section, key, default=None, required=False):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if required:
        raise ConfigError(f"missing required option [{section}] {key}")
    return default


def _parse_expr(text, where, allowed):
    try:
        node = parse(text)
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad expression for {where}: {exc}") from exc
    extra = variables(node) - set(allowed)
    if extra:
        import warnings
        warnings.warn(f"{where} uses variable(s) {sorted(extra)}; expected "
                      f"only {sorted(allowed)}", UserWarning, stacklevel=3)
    return node


def _parse_floats(text):
    text = text.strip()
    if not text:
        return []
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_branch(text, name):
    points = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"{name}: branch points must be 'v:value' pairs")
        r, val = chunk.split(":", 1)
        points.append((float(r), float(val)))
    return points


def _parse_levels(text):
    levels = []
    for chunk in text.split(","):
        chunk = chunk.strip().lower()
        if not chunk:
            continue
        if "x" not in chunk:
            raise ConfigError("levels must be 'MxN' pairs, e.g. 8x16, 16x32")
        m, n = chunk.split("x", 1)
        levels.append((int(m), int(n)))
    return levels


def load_config(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    ell = float(_get(cp, "domain", "ell", required=True))
    T = float(_get(cp, "domain", "T", required=True))
    if ell <= 0 or T <= 0:
        raise ConfigError("domain lengths ell and T must be positive")

    temps = _parse_floats(_get(cp, "beta", "phase_temps", default=""))
    jumps = _parse_floats(_get(cp, "beta", "jumps", default=""))
    slope_lo = float(_get(cp, "beta", "slope_lo", required=True))
    slope_hi = float(_get(cp, "beta", "slope_hi", required=True))
    branches = []
    for bi in range(1, len(temps) + 2):
        text = _get(cp, "beta", f"branch_{bi}", required=True)
        branches.append(_parse_branch(text, f"branch_{bi}"))
    try:
        graph = build_graph(temps, jumps, branches, slope_lo, slope_hi)
    except BetaGraphError as exc:
        raise ConfigError(f"invalid enthalpy graph: {exc}") from exc

    a = _parse_expr(_get(cp, "coefficients", "a", required=True), "a", ("x", "t"))
    b = _parse_expr(_get(cp, "coefficients", "b", default="0"), "b", ("x", "t"))
    c = _parse_expr(_get(cp, "coefficients", "c", default="0"), "c", ("x", "t"))
    f = _parse_expr(_get(cp, "coefficients", "f", default="0"), "f", ("x", "t"))
    phi = _parse_expr(_get(cp, "data", "phi", required=True), "phi", ("x",))
    p = _parse_expr(_get(cp, "data", "p", default="0"), "p", ("t",))
    omega = _parse_expr(_get(cp, "data", "omega", default="0"), "omega", ("x",))
    a0 = float(_get(cp, "coefficients", "a0", required=True))
    if a0 <= 0:
        raise ConfigError("the ellipticity floor a0 must be positive")
    R = float(_get(cp, "control", "R", default="10"))
    if R <= 0:
        raise ConfigError("control radius R must be positive")
    data = ProblemData(a=a, b=b, c=c, f=f, phi=as_fn_x(phi), p=as_fn_t(p),
                       omega=as_fn_x(omega), a0=a0, ell=ell, T=T, R=R)

    levels_text = _get(cp, "grid", "levels")
    if levels_text:
        levels = _parse_levels(levels_text)
    else:
        m = int(_get(cp, "grid", "m", required=True))
        n = int(_get(cp, "grid", "n", required=True))
        levels = [(m, n)]
    if any(m < 1 or n < 1 for m, n in levels):
        raise ConfigError("grid sizes must be positive")

    fp_tol = _get(cp, "solver", "fp_tol")
    solve_opts = SolveOptions(
        fp_tol=float(fp_tol) if fp_tol else None,
        residual_tol=float(_get(cp, "solver", "residual_tol", default="1e-11")),
        max_sweeps=int(_get(cp, "solver", "max_sweeps", default="10000")))

    fd_eps = _get(cp, "optimizer", "fd_epsilon")
    seed = _get(cp, "optimizer", "seed")
    opt_opts = OptimizeOptions(
        tol=float(_get(cp, "optimizer", "tol", default="1e-8")),
        max_iters=int(_get(cp, "optimizer", "max_iters", default="200")),
        fd_epsilon=float(fd_eps) if fd_eps else None,
        seed=int(seed) if seed else None)

    moll = _get(cp, "mollifier", "n")
    initial = _get(cp, "control", "initial", default="0")
    if initial.startswith("csv:"):
        initial_control = initial
    else:
        initial_control = _parse_expr(initial, "initial control", ("t",))
    nodal = _get(cp, "control", "nodal_targets", default="false").lower() in ("1", "true", "yes")

    psi_text = _get(cp, "verify", "psi")
    psi = _parse_expr(psi_text, "psi", ("x", "t")) if psi_text else None

    return Config(data=data, graph=graph, levels=levels, solve_opts=solve_opts,
                  opt_opts=opt_opts, moll_n=int(moll) if moll else None,
                  initial_control=initial_control, nodal_targets=nodal,
                  sha256=config_hash(path), psi=psi,
                  raw={s: dict(cp.items(s)) for s in cp.sections()})
