"""Outer reweighting loops (coco, cocots, cocotv) and path utilities."""

from src.engine.coco import (
    composite_values,
    dual_weights,
    fit,
    fit_multistart,
    fit_path,
    irwls_weights,
    lambda_grid,
    lambda_max,
    objective,
    predict,
    trimmed_objective,
)
from src.losses.composite import linear_predictor, margins

__all__ = [
    "composite_values",
    "dual_weights",
    "fit",
    "fit_multistart",
    "fit_path",
    "irwls_weights",
    "lambda_grid",
    "lambda_max",
    "linear_predictor",
    "margins",
    "objective",
    "predict",
    "trimmed_objective",
]
