"""Concave and convex components and their composition."""

from src.losses.composite import (
    composite_derivative,
    convex_values,
    eval_composite,
    linear_predictor,
    margins,
    response_for,
)
from src.losses.concave import (
    concave_knots,
    concave_supremum,
    concave_weight,
    eval_concave,
    is_differentiable,
    max_weight,
    neg_subgradient,
)
from src.losses.convex import (
    convex_derivative,
    convex_knots,
    convex_offset,
    convex_second_derivative,
    eval_convex,
    is_glm,
    is_piecewise_linear,
)

__all__ = [
    "composite_derivative",
    "concave_knots",
    "concave_supremum",
    "concave_weight",
    "convex_derivative",
    "convex_knots",
    "convex_offset",
    "convex_second_derivative",
    "convex_values",
    "eval_composite",
    "eval_concave",
    "eval_convex",
    "is_differentiable",
    "is_glm",
    "is_piecewise_linear",
    "linear_predictor",
    "margins",
    "max_weight",
    "neg_subgradient",
    "response_for",
]
