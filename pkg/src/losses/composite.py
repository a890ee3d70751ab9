"""
Composite losses Gamma = g o s and the margin mapping.
"""

from typing import Optional

import numpy as np

from src.exceptions import ValidationError
from src.losses.concave import eval_concave, neg_subgradient
from src.losses.convex import convex_derivative, convex_offset, eval_convex
from src.models import CompositeLoss, ConvexSpec, Dataset, TaskKind


def linear_predictor(beta, data: Dataset) -> np.ndarray:
    """
    Compute f = X beta.

    Args:
        beta: Coefficient vector of length q
        data: Dataset

    Returns:
        Vector of linear predictors

    Raises:
        ValidationError: If beta has the wrong length
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.q,):
        raise ValidationError(
            f"beta must have length {data.q} for this dataset, got shape {beta.shape}"
        )
    return data.X @ beta


def margins(beta, data: Dataset) -> np.ndarray:
    """
    Map coefficients to per-observation margins u_i.

    Regression uses the residual y - f, classification uses y * f with
    labels in {-1, +1}, and the exponential-family tasks use f itself.

    Args:
        beta: Coefficient vector of length q
        data: Dataset

    Returns:
        Vector of margins
    """
    f = linear_predictor(beta, data)
    if data.task is TaskKind.REGRESSION:
        return data.y - f
    if data.task is TaskKind.CLASSIFICATION:
        return data.y * f
    return f


def response_for(data: Dataset) -> Optional[np.ndarray]:
    """Response passed to the convex component (None for margin-only tasks)."""
    if data.task in (TaskKind.BINOMIAL, TaskKind.POISSON):
        return data.y
    return None


def convex_values(u, data: Dataset, convex: ConvexSpec) -> np.ndarray:
    """
    Compute z_i = s(u_i), including the poisson log(y!) offset.

    Returns:
        Nonnegative vector z
    """
    y = response_for(data)
    z = np.asarray(eval_convex(convex, u, y), dtype=float) + convex_offset(convex, y)
    # rounding in logaddexp can leave -1e-17
    return np.maximum(z, 0.0)


def eval_composite(loss: CompositeLoss, u, y=None):
    """
    Evaluate Gamma(u) = g(s(u)).

    Args:
        loss: Composite loss
        u: Margin(s)
        y: Response(s) for the exponential-family forms

    Returns:
        Gamma(u) with the shape of u
    """
    z = np.asarray(eval_convex(loss.convex, u, y), dtype=float)
    if y is not None:
        z = z + convex_offset(loss.convex, y)
    z = np.maximum(z, 0.0)
    out = eval_concave(loss.concave, z)
    return float(out) if np.ndim(u) == 0 else out


def composite_derivative(loss: CompositeLoss, u, y=None):
    """
    Chain-rule derivative Gamma'(u) = g'(s(u)) s'(u).

    Uses the same subgradient selection as neg_subgradient at kinks.
    """
    z = np.asarray(eval_convex(loss.convex, u, y), dtype=float)
    if y is not None:
        z = z + convex_offset(loss.convex, y)
    z = np.maximum(z, 0.0)
    g_prime = -np.asarray(neg_subgradient(loss.concave, z))
    out = g_prime * np.asarray(convex_derivative(loss.convex, u, y))
    return float(out) if np.ndim(u) == 0 else out
