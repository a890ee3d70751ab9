"""Penalties and weighted inner solvers."""

from src.solvers.inner import (
    solve_inner,
    solve_weighted_gaussian,
    solve_weighted_glm,
    solve_weighted_piecewise,
    weighted_objective,
)
from src.solvers.penalty import eval_penalty, scad_derivative, scad_value, threshold

__all__ = [
    "eval_penalty",
    "scad_derivative",
    "scad_value",
    "solve_inner",
    "solve_weighted_gaussian",
    "solve_weighted_glm",
    "solve_weighted_piecewise",
    "threshold",
    "weighted_objective",
]
