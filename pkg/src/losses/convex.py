"""
Convex components s of the CC-family.

The binomial component has two forms: the margin form log(1 + exp(-u)) used
with +/-1 labels, and the GLM form -y*u + log(1 + exp(u)) used when a 0/1
response is passed. Poisson always needs the observed count.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import expit, gammaln

from src.exceptions import ValidationError
from src.models import ConvexKind, ConvexSpec

ArrayLike = Union[float, np.ndarray]


def _prepare(s: ConvexSpec, u, y):
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    if s.kind is ConvexKind.POISSON and y is None:
        raise ValidationError("poisson convex component requires the observed count y")
    y_arr = None if y is None else np.asarray(y, dtype=float)
    return arr, y_arr, scalar


def _restore(values, scalar: bool) -> ArrayLike:
    values = np.asarray(values, dtype=float)
    return float(values) if scalar else values


def eval_convex(s: ConvexSpec, u, y=None) -> ArrayLike:
    """
    Evaluate s(u).

    Args:
        s: Convex component
        u: Margin(s)
        y: Response(s); required for poisson, selects the GLM form for binomial

    Returns:
        s(u) with the shape of u

    Raises:
        ValidationError: If poisson is evaluated without y
    """
    u, y, scalar = _prepare(s, u, y)
    kind = s.kind

    if kind is ConvexKind.GAUSSIAN:
        out = 0.5 * u**2
    elif kind is ConvexKind.GAUSSIAN_C:
        out = 0.5 * (1 - u) ** 2
    elif kind is ConvexKind.BINOMIAL:
        if y is None:
            out = np.logaddexp(0.0, -u)
        else:
            out = np.logaddexp(0.0, u) - y * u
    elif kind is ConvexKind.POISSON:
        with np.errstate(over="ignore"):
            out = -y * u + np.exp(u)
    elif kind is ConvexKind.HINGE:
        out = np.maximum(0.0, 1 - u)
    else:
        out = np.maximum(0.0, np.abs(u) - s.epsilon)

    return _restore(out, scalar)


def convex_offset(s: ConvexSpec, y) -> ArrayLike:
    """
    Constant added to s(u) before the concave component is applied.

    Poisson adds log(y!) so that the argument is the full negative
    log-likelihood and stays nonnegative; every other kind adds zero.
    """
    if s.kind is ConvexKind.POISSON:
        return gammaln(np.asarray(y, dtype=float) + 1.0)
    return 0.0 if y is None else np.zeros_like(np.asarray(y, dtype=float))


def convex_derivative(s: ConvexSpec, u, y=None) -> ArrayLike:
    """
    First derivative s'(u); a subgradient at the hinge and tube kinks.

    Args:
        s: Convex component
        u: Margin(s)
        y: Response(s), as for eval_convex

    Returns:
        s'(u) with the shape of u
    """
    u, y, scalar = _prepare(s, u, y)
    kind = s.kind

    if kind is ConvexKind.GAUSSIAN:
        out = u
    elif kind is ConvexKind.GAUSSIAN_C:
        out = u - 1
    elif kind is ConvexKind.BINOMIAL:
        out = -expit(-u) if y is None else expit(u) - y
    elif kind is ConvexKind.POISSON:
        with np.errstate(over="ignore"):
            out = np.exp(u) - y
    elif kind is ConvexKind.HINGE:
        out = np.where(u < 1, -1.0, 0.0)
    else:
        out = np.where(np.abs(u) > s.epsilon, np.sign(u), 0.0)

    return _restore(out, scalar)


def convex_second_derivative(s: ConvexSpec, u, y=None) -> ArrayLike:
    """Second derivative s''(u), zero on the linear pieces of hinge and epsInsensitive."""
    u, y, scalar = _prepare(s, u, y)
    kind = s.kind

    if kind in (ConvexKind.GAUSSIAN, ConvexKind.GAUSSIAN_C):
        out = np.ones_like(u)
    elif kind is ConvexKind.BINOMIAL:
        out = expit(u) * expit(-u)
    elif kind is ConvexKind.POISSON:
        with np.errstate(over="ignore"):
            out = np.exp(u)
    else:
        out = np.zeros_like(u)

    return _restore(out, scalar)


def convex_knots(s: ConvexSpec) -> Tuple[float, ...]:
    """Points u where s is not differentiable."""
    if s.kind is ConvexKind.HINGE:
        return (1.0,)
    if s.kind is ConvexKind.EPS_INSENSITIVE:
        eps = s.epsilon
        return (-eps, eps) if eps > 0 else (0.0,)
    return ()


def is_piecewise_linear(s: ConvexSpec) -> bool:
    """Whether s is handled by the piecewise-linear inner solver."""
    return s.kind in (ConvexKind.HINGE, ConvexKind.EPS_INSENSITIVE)


def is_glm(s: ConvexSpec) -> bool:
    """Whether s is an exponential-family likelihood solved by IRLS."""
    return s.kind in (ConvexKind.BINOMIAL, ConvexKind.POISSON)


def value_at_zero(s: ConvexSpec, y: Optional[float] = None) -> float:
    """s(0), with the poisson offset included."""
    base = eval_convex(s, 0.0, y)
    if s.kind is ConvexKind.POISSON:
        base += math.lgamma(float(y) + 1.0)
    return float(base)
