"""Windowed acceleration of fixed-point iterations for nonlinear systems.

The package provides the accelerated solver and its plain fixed-point
baseline, a rank-aware least-squares kernel for the per-step coefficient
problem, two benchmark problem families, convergence-rate diagnostics,
and a CSV-emitting experiment CLI (``ngmres``).
"""

from .core import (
    EvaluationError,
    IterationHistory,
    IterationRecord,
    NonlinearProblem,
    Status,
    StoppingCriterion,
    as_vector,
    fixed_point_solve,
    fixed_point_step,
    residual,
)
from .diagnostics import (
    AssumptionSummary,
    DiagnosticsReport,
    assumption_monitor,
    build_report,
    eta_bound,
    eta_bound_valid,
    lemma_sandwich_check,
    q_factors,
    root_factors,
)
from .leastsq import (
    DegenerateDenominator,
    LsSolution,
    LsSystem,
    beta0_closed_form,
    solve_ls,
)
from .problems import (
    Quadratic2DParams,
    TrigParams,
    jacobian_fd,
    make_problem,
    make_quadratic_2d,
    make_trigonometric,
    operator_norm,
)
from .solver import (
    SolverConfig,
    Window,
    anderson_solve,
    anderson_step,
    ngmres_solve,
    ngmres_step,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionSummary",
    "DegenerateDenominator",
    "DiagnosticsReport",
    "EvaluationError",
    "IterationHistory",
    "IterationRecord",
    "LsSolution",
    "LsSystem",
    "NonlinearProblem",
    "Quadratic2DParams",
    "SolverConfig",
    "Status",
    "StoppingCriterion",
    "TrigParams",
    "Window",
    "anderson_solve",
    "anderson_step",
    "as_vector",
    "assumption_monitor",
    "beta0_closed_form",
    "build_report",
    "eta_bound",
    "eta_bound_valid",
    "fixed_point_solve",
    "fixed_point_step",
    "jacobian_fd",
    "lemma_sandwich_check",
    "make_problem",
    "make_quadratic_2d",
    "make_trigonometric",
    "ngmres_solve",
    "ngmres_step",
    "operator_norm",
    "q_factors",
    "residual",
    "root_factors",
    "solve_ls",
]
