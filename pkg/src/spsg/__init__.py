"""Structure-preserving stochastic Galerkin solvers for Fokker-Planck models
with background interactions."""

from .gpc import (
    GPCBasis,
    build_basis,
    confidence_band,
    eval_poly,
    project_function,
    reconstruct,
    reconstruct_mean,
    reconstruct_variance,
)
from .grid import QuadRule, UniformGrid1D, build_grid, integrate_interval, make_grid, node_grid, quad_rule
from .sp import (
    Background,
    FluxWorkspace,
    ProblemSpec,
    build_workspace,
    compute_delta,
    compute_lambda,
    delta_from_steady_state,
)
from .stepping import (
    PositivityBoundError,
    SolverError,
    advance,
    explicit_dt_bound,
    semiimplicit_dt_bound,
    step_euler,
    step_rk4,
    step_semi_implicit,
    thomas_solve,
)

__version__ = "0.1.0"

__all__ = [
    "Background",
    "FluxWorkspace",
    "GPCBasis",
    "PositivityBoundError",
    "ProblemSpec",
    "QuadRule",
    "SolverError",
    "UniformGrid1D",
    "advance",
    "build_basis",
    "build_grid",
    "build_workspace",
    "compute_delta",
    "compute_lambda",
    "confidence_band",
    "delta_from_steady_state",
    "eval_poly",
    "explicit_dt_bound",
    "integrate_interval",
    "make_grid",
    "node_grid",
    "project_function",
    "quad_rule",
    "reconstruct",
    "reconstruct_mean",
    "reconstruct_variance",
    "semiimplicit_dt_bound",
    "step_euler",
    "step_rk4",
    "step_semi_implicit",
    "thomas_solve",
]
