"""
Penalty Lambda(beta): an alpha-mix of a sparsity penalty (LASSO or SCAD)
and a ridge term, plus the scalar thresholding rule used by coordinate
descent.
"""

import math
from typing import Union

import numpy as np

from src.exceptions import ValidationError
from src.models import PenaltyFamily, PenaltySpec

ArrayLike = Union[float, np.ndarray]


def soft_threshold(z, t):
    """Soft-thresholding operator sign(z) max(|z| - t, 0)."""
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def scad_value(theta, lam: float, a: float) -> ArrayLike:
    """
    SCAD penalty p(theta) for theta >= 0.

    Args:
        theta: Nonnegative magnitude(s)
        lam: Penalty level
        a: Shape parameter (> 2)

    Returns:
        Penalty value(s)
    """
    theta = np.abs(np.asarray(theta, dtype=float))
    linear = lam * theta
    quadratic = (2 * a * lam * theta - theta**2 - lam**2) / (2 * (a - 1))
    flat = (a + 1) * lam**2 / 2
    out = np.where(theta <= lam, linear, np.where(theta <= a * lam, quadratic, flat))
    return float(out) if out.ndim == 0 else out


def scad_derivative(theta, lam: float, a: float) -> ArrayLike:
    """
    SCAD derivative.

    lam for theta <= lam, (a lam - theta)_+ / (a - 1) beyond.
    """
    theta = np.abs(np.asarray(theta, dtype=float))
    if lam == 0:
        out = np.zeros_like(theta)
    else:
        out = np.where(theta <= lam, lam, np.maximum(a * lam - theta, 0.0) / (a - 1))
    return float(out) if out.ndim == 0 else out


def sparsity_value(spec: PenaltySpec, theta) -> ArrayLike:
    """p_lambda(|theta|) for the spec's family."""
    if spec.family is PenaltyFamily.SCAD:
        return scad_value(theta, spec.lam, spec.scad_a)
    out = spec.lam * np.abs(np.asarray(theta, dtype=float))
    return float(out) if out.ndim == 0 else out


def sparsity_derivative(spec: PenaltySpec, theta) -> ArrayLike:
    """Right derivative p'_lambda(|theta|), equal to lambda at the origin."""
    if spec.family is PenaltyFamily.SCAD:
        return scad_derivative(theta, spec.lam, spec.scad_a)
    out = np.full_like(np.asarray(theta, dtype=float), spec.lam)
    return float(out) if out.ndim == 0 else out


def penalized_slopes(beta, intercept: bool = True) -> np.ndarray:
    """The penalized part of beta (everything but the intercept)."""
    beta = np.asarray(beta, dtype=float)
    return beta[1:] if intercept else beta


def eval_penalty(spec: PenaltySpec, beta, intercept: bool = True) -> float:
    """
    Evaluate Lambda(beta) = sum_j alpha p(|beta_j|) + lambda (1 - alpha)/2 beta_j^2.

    Args:
        spec: Penalty specification
        beta: Coefficient vector, intercept first when intercept is True
        intercept: Whether beta[0] is an unpenalized intercept

    Returns:
        Penalty value
    """
    if spec.lam == 0:
        return 0.0
    slopes = penalized_slopes(beta, intercept)
    sparse = np.sum(sparsity_value(spec, slopes))
    ridge = spec.lam * (1 - spec.alpha) / 2 * np.sum(slopes**2)
    return float(spec.alpha * sparse + ridge)


def _scalar_objective(spec: PenaltySpec, b: float, t: float, c: float) -> float:
    return 0.5 * c * b * b - t * b + spec.alpha * float(sparsity_value(spec, b))


def threshold(spec: PenaltySpec, z: float, weight_sum: float) -> float:
    """
    Minimize (weight_sum/2) b^2 - z b + alpha p(|b|) + lambda (1 - alpha)/2 b^2 over b.

    LASSO is soft-thresholding followed by ridge shrinkage. SCAD compares
    the stationary point of each of its three zones (and the zone
    boundaries) and keeps the best, preferring b = 0 on ties.

    Args:
        spec: Penalty specification
        z: Linear coefficient of the scalar problem
        weight_sum: Curvature of the loss part (> 0)

    Returns:
        The minimizing b

    Raises:
        ValidationError: If weight_sum is not positive
    """
    if not weight_sum > 0:
        raise ValidationError(f"weight_sum must be > 0, got {weight_sum}")
    lam, alpha = spec.lam, spec.alpha
    c = weight_sum + lam * (1 - alpha)

    if spec.family is PenaltyFamily.LASSO or lam == 0 or alpha == 0:
        return float(soft_threshold(z, alpha * lam)) / c

    a = spec.scad_a
    t = abs(z)
    candidates = [0.0, min(max((t - alpha * lam) / c, 0.0), lam), lam, a * lam]
    denom = c * (a - 1) - alpha
    if denom > 0:
        middle = (t * (a - 1) - alpha * a * lam) / denom
        candidates.append(min(max(middle, lam), a * lam))
    candidates.append(max(t / c, a * lam))

    best, best_value = 0.0, _scalar_objective(spec, 0.0, t, c)
    for b in candidates[1:]:
        value = _scalar_objective(spec, b, t, c)
        if value < best_value:
            best, best_value = b, value
    return math.copysign(best, z) if best else 0.0
