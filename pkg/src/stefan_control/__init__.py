"""Finite-difference solver and boundary-flux control for multiphase
Stefan-type free boundary problems in enthalpy form."""

__version__ = "1.0.0"

from .expr import parse, evaluate, to_string, ExprSyntaxError, ExprDomainError
from .beta import BetaGraph, SmoothedBeta, build_graph, mollifier_constant
from .grid import (Grid, ProblemData, AveragedData, MeshConditionError,
                   make_grid, average_data, steklov_time, steklov_space,
                   steklov_cell, sup_norms)
from .control import (DiscreteControl, PiecewiseLinearControl,
                      discrete_norm, qn_map, pn_map, project)
from .forward import (DiscreteState, StepReport, SolverReport, SolveOptions,
                      SolverError, NonContractingError, MaxSweepsExceededError,
                      scalar_solve, solve_step, solve_forward,
                      solve_forward_batch, zeta, residual_dsvsum, delta_theory)
from .objective import (OptimizationResult, OptimizeOptions, DiscreteProblem,
                        cost, fd_gradient, optimize, average_targets)
from .analysis import (Interpolant, EnergyBreakdown, DataNorms, ConvergenceTable,
                       ProblemSetup, NeumannSolution, interpolate, energy_norm,
                       linf_ratio, data_norm_bundle, weak_residual,
                       weak_identity_residual, l2_distance, l2_distance_to_fn,
                       refine_study, neumann_oracle, free_boundary)
