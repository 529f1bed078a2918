"""Batch command-line front-end.

    stefan-control <solve|optimize|refine|verify> --config PATH
                   [--out DIR] [--threads N] [--seed S]

solve     forward solve with the configured control; dumps the state
          (i, k, x, t, v) and per-step diagnostics as CSV.
optimize  eps-optimal control search; dumps the control (k, t, g) and
          the descent history (iter, cost, step, norm).
refine    convergence study over the configured levels (forward mode
          unless [grid] mode = optimize); dumps the table.
verify    runs the built-in invariant suite (contraction, estimate
          boundedness, mapping consistency, weak-form residual decay,
          similarity benchmark) and reports PASS/FAIL per check.

Exit codes: 0 success, 1 validation error, 2 solver failure, 3 verify
failure.  Outputs embed the config hash and tool version, and are
byte-identical across runs with the same config and seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (data_norm_bundle, free_boundary, interpolate,
                       l2_distance_to_fn, linf_ratio, energy_norm,
                       refine_study, weak_residual)
from .beta import SmoothedBeta
from .config import ConfigError, load_config
from .control import DiscreteControl, discrete_norm, l2_distance_pl_fn, pn_map, qn_map
from .expr import as_fn_t, parse
from .forward import SolveOptions, SolverError, solve_forward
from .grid import DataValidationError, MeshConditionError, average_data, make_grid
from .objective import DiscreteProblem, average_targets, optimize
from .scenarios import neumann_setup

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path, header, rows, cfg_hash):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# stefan-control {__version__} config_sha256={cfg_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _initial_control(cfg, grid):
    if isinstance(cfg.initial_control, str):  # csv:PATH with (k, t, g) rows
        path = cfg.initial_control[4:]
        arr = np.genfromtxt(path, delimiter=",", comments="#", skip_header=1)
        g = np.asarray(arr[:, 2], dtype=float)
        if len(g) != grid.n + 1:
            raise ConfigError(f"control file has {len(g)} rows, grid wants {grid.n + 1}")
        return DiscreteControl(g=g, tau=grid.tau)
    return qn_map(as_fn_t(cfg.initial_control), grid)


def _prepare(cfg, level):
    m, n = level
    grid = make_grid(cfg.data, cfg.graph, m, n)
    avg = average_data(cfg.data, grid)
    sb = SmoothedBeta(cfg.graph, cfg.moll_n if cfg.moll_n else n)
    return grid, avg, sb


def _cmd_solve(cfg, out):
    grid, avg, sb = _prepare(cfg, cfg.levels[-1])
    gd = _initial_control(cfg, grid)
    state, report = solve_forward(gd, avg, sb, grid, cfg.solve_opts)
    rows = []
    for k in range(grid.n + 1):
        for i in range(grid.m + 1):
            rows.append((i, k, grid.xs[i], grid.ts[k], state.v[k, i]))
    _write_csv(out / "state.csv", ("i", "k", "x", "t", "v"), rows, cfg.sha256)
    diag = [(s.k, s.sweeps, s.final_change, s.max_residual,
             float(s.ratios.max()) if len(s.ratios) else 0.0)
            for s in report.steps]
    _write_csv(out / "steps.csv",
               ("k", "sweeps", "final_change", "max_residual", "max_ratio"),
               diag, cfg.sha256)
    norms = data_norm_bundle(cfg.data, grid, pn_map(gd))
    energy = energy_norm(state, grid)
    print(f"solved {grid.m}x{grid.n}: sweeps_total={report.total_sweeps} "
          f"max_residual={report.max_residual:.3e} "
          f"linf_ratio={linf_ratio(state, norms):.6g} "
          f"energy={energy.total:.6g}")
    return EXIT_OK


def _cmd_optimize(cfg, out):
    grid, avg, sb = _prepare(cfg, cfg.levels[-1])
    targets = average_targets(cfg.data.omega, grid, cfg.nodal_targets)
    problem = DiscreteProblem(avg=avg, sb=sb, grid=grid, targets=targets,
                              R=cfg.data.R, solve_opts=cfg.solve_opts)
    initial = _initial_control(cfg, grid)
    opts = cfg.opt_opts
    opts.initial = initial.g
    result = optimize(problem, cfg.data.R, opts)
    g = result.control
    _write_csv(out / "control.csv", ("k", "t", "g"),
               [(k, grid.ts[k], g.g[k]) for k in range(grid.n + 1)], cfg.sha256)
    _write_csv(out / "history.csv", ("iter", "cost", "step", "norm"),
               result.history, cfg.sha256)
    print(f"optimized {grid.m}x{grid.n}: cost={result.cost:.6e} "
          f"eps_n={result.eps_n:.3e} iters={len(result.history) - 1} "
          f"solves={result.forward_solves} norm={discrete_norm(g):.6g} "
          f"({result.termination})")
    return EXIT_OK


def _cmd_refine(cfg, out, threads):
    from .analysis import ProblemSetup
    mode = cfg.raw.get("grid", {}).get("mode", "forward").strip()
    control = None if isinstance(cfg.initial_control, str) \
        else as_fn_t(cfg.initial_control)
    setup = ProblemSetup(data=cfg.data, graph=cfg.graph, control=control,
                         moll_n=cfg.moll_n, nodal_targets=cfg.nodal_targets)
    table = refine_study(setup, cfg.levels, mode=mode,
                         solve_opts=cfg.solve_opts, opt_opts=cfg.opt_opts,
                         threads=threads)
    _write_csv(out / "table.csv", table.CSV_COLUMNS, table.csv_rows(), cfg.sha256)
    for row in table.rows:
        status = row.error or "ok"
        print(f"level {row.m}x{row.n}: cost={row.cost:.6e} "
              f"linf_ratio={row.linf_ratio:.4g} energy_ratio={row.energy_ratio:.4g} "
              f"dist_to_next={row.dist_to_next:.4g} [{status}]")
    if any(row.error for row in table.rows):
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_verify(cfg, out):
    checks = []

    def check(name, ok, detail):
        checks.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    m, n = cfg.levels[-1]
    grid, avg, sb = _prepare(cfg, (m, n))
    gd = _initial_control(cfg, grid)

    # contraction: every sweep ratio after the first below one
    state, report = solve_forward(gd, avg, sb, grid, cfg.solve_opts)
    ratios = [float(s.ratios.max()) for s in report.steps if len(s.ratios)]
    worst = max(ratios) if ratios else 0.0
    check("contraction", worst < 1.0,
          f"max sweep ratio {worst:.4f} over {grid.n} steps")

    # estimate boundedness across three dyadic levels
    from .analysis import ProblemSetup
    setup = ProblemSetup(data=cfg.data, graph=cfg.graph,
                         control=None if isinstance(cfg.initial_control, str)
                         else as_fn_t(cfg.initial_control), moll_n=cfg.moll_n)
    levels = [(max(2, m // 4), max(2, n // 4)), (max(2, m // 2), max(2, n // 2)), (m, n)]
    table = refine_study(setup, levels, mode="forward", solve_opts=cfg.solve_opts)
    ok_rows = [r for r in table.rows if r.error is None]
    if len(ok_rows) == len(table.rows):
        linfs = np.array([r.linf_ratio for r in ok_rows])
        energies = np.array([r.energy_ratio for r in ok_rows])
        ok = linfs.max() / linfs.min() < 1.5 and energies.max() / energies.min() < 1.5
        check("estimates", ok,
              f"linf ratio spread {linfs.max() / linfs.min():.3f}, "
              f"energy ratio spread {energies.max() / energies.min():.3f}")
    else:
        check("estimates", False, "a refinement level failed: "
              + "; ".join(r.error for r in table.rows if r.error))

    # mapping consistency for a smooth control scaled inside the ball
    R = cfg.data.R
    amp = (R - 0.1 * R) / np.sqrt(0.5 * grid.T * (1.0 + (2 * np.pi / grid.T) ** 2))
    g_smooth = as_fn_t(parse(f"{amp!r}*sin({2.0 * np.pi / grid.T!r}*t)"))
    errs = []
    feas = True
    for nn in (8, 16, 32, 64):
        sub = make_grid(cfg.data, cfg.graph, max(2, m), nn)
        gdn = qn_map(g_smooth, sub)
        feas &= discrete_norm(gdn) <= R
        errs.append(l2_distance_pl_fn(pn_map(gdn), g_smooth))
    drops = [errs[j + 1] / errs[j] for j in range(len(errs) - 1)]
    ok = feas and all(0.3 <= d <= 0.8 for d in drops)
    check("mappings", ok, f"Q_n feasible={feas}, P_nQ_n error ratios "
          + ", ".join(f"{d:.3f}" for d in drops))

    # weak-form residual decay on dyadic levels
    psi = cfg.psi if cfg.psi is not None else \
        parse(f"({grid.T!r} - t)*cos({np.pi / grid.ell!r}*x)")
    residuals = []
    for (mm, nn) in levels:
        gsub, asub, ssub = _prepare(cfg, (mm, nn))
        gdn = _initial_control(cfg, gsub)
        st, _ = solve_forward(gdn, asub, ssub, gsub, cfg.solve_opts)
        residuals.append(abs(weak_residual(st, cfg.data, asub, pn_map(gdn),
                                           ssub, gsub, psi)))
    ok = all(residuals[j + 1] < residuals[j] for j in range(len(residuals) - 1))
    check("weak_residual", ok,
          "|residual| = " + ", ".join(f"{r:.3e}" for r in residuals))

    # similarity benchmark on its own canned two-phase problem
    nsetup, oracle = neumann_setup()
    fronts = []
    prof_errs = []
    for (mm, nn) in ((12, 36), (24, 100), (48, 280)):
        gsub = make_grid(nsetup.data, nsetup.graph, mm, nn)
        asub = average_data(nsetup.data, gsub)
        ssub = SmoothedBeta(nsetup.graph, nn)
        gdn = qn_map(nsetup.control, gsub)
        st, _ = solve_forward(gdn, asub, ssub, gsub, cfg.solve_opts)
        itp = interpolate(st, gsub, "bilinear")
        crossings = free_boundary(itp, gsub.T, oracle.v1)
        fronts.append(crossings[0] if crossings else np.nan)
        prof = lambda x, t: oracle.value(x, gsub.T)
        xe = np.linspace(0, gsub.ell, 801)
        vals = itp(xe, np.full_like(xe, gsub.T)) - oracle.value(xe, gsub.T)
        prof_errs.append(float(np.sqrt(np.trapezoid(vals ** 2, xe))))
    target = float(oracle.front(nsetup.data.T))
    rel = abs(fronts[-1] - target) / target
    ok = rel < 0.05 and all(prof_errs[j + 1] < prof_errs[j]
                            for j in range(len(prof_errs) - 1))
    check("neumann", ok, f"front rel err {rel:.4f} (target {target:.4f}), "
          "profile L2 errs " + ", ".join(f"{e:.3e}" for e in prof_errs))

    _write_csv(out / "verify.csv", ("check", "passed", "detail"),
               [(name, int(ok), detail) for name, ok, detail in checks],
               cfg.sha256)
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_VERIFY


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="stefan-control",
        description="Multiphase Stefan solver and boundary-flux control")
    parser.add_argument("command", choices=("solve", "optimize", "refine", "verify"))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, MeshConditionError, DataValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        cfg.opt_opts.seed = args.seed
    out = Path(args.out)
    try:
        if args.command == "solve":
            return _cmd_solve(cfg, out)
        if args.command == "optimize":
            return _cmd_optimize(cfg, out)
        if args.command == "refine":
            return _cmd_refine(cfg, out, args.threads)
        return _cmd_verify(cfg, out)
    except (MeshConditionError, DataValidationError, ConfigError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
