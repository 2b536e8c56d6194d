"""Parallel-in-time solver lab: parareal/SParareal runs, error bounds,
and Monte Carlo experiments."""

from .bounds import (
    BoundConstants,
    Inapplicable,
    constants_for,
    k1_bound,
    linear_bound,
    rule_bound,
    solve_recursion_rules,
    solve_recursion_superlinear,
    superlinear_bound,
)
from .core import IterationHistory, RunConfig, SolverError, parareal_solve, sparareal_solve
from .perturbations import NO_NOISE, PerturbationModel
from .problems import (
    IVProblem,
    Mesh,
    ProblemError,
    linear_problem_from_diag,
    make_linear_problem,
    make_scalar_problem,
    serial_fine_solve,
)

__all__ = [
    "BoundConstants",
    "Inapplicable",
    "IterationHistory",
    "IVProblem",
    "Mesh",
    "NO_NOISE",
    "PerturbationModel",
    "ProblemError",
    "RunConfig",
    "SolverError",
    "constants_for",
    "k1_bound",
    "linear_bound",
    "linear_problem_from_diag",
    "make_linear_problem",
    "make_scalar_problem",
    "parareal_solve",
    "rule_bound",
    "serial_fine_solve",
    "solve_recursion_rules",
    "solve_recursion_superlinear",
    "sparareal_solve",
    "superlinear_bound",
]

__version__ = "0.1.0"
