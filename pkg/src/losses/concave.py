"""
Concave components g of the CC-family.

Each function accepts a scalar or an array of nonnegative z and returns the
same shape (a Python float for scalar input). The weight of an observation
is -v with v = neg_subgradient(g, z), which is nonincreasing in z for every
kind.
"""

import logging
import math
from typing import Tuple, Union

import numpy as np
from scipy.special import erf

from src.exceptions import DomainError
from src.models import ConcaveKind, ConcaveSpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _as_domain(z) -> Tuple[np.ndarray, bool]:
    """Convert z to a float array and reject negative or NaN entries."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("concave component evaluated at NaN")
    if np.any(arr < 0):
        raise DomainError(f"concave component requires z >= 0, got min z = {arr.min():g}")
    return arr, arr.ndim == 0


def _restore(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def ecave_slope(sigma: float, delta: float) -> float:
    """Slope of ecave on its linear piece [0, delta]."""
    return 2.0 * math.exp(-delta / sigma) / math.sqrt(math.pi * sigma * delta)


def gcave_slope(sigma: float, delta: float) -> float:
    """Slope of gcave on its linear piece [0, delta]."""
    return delta ** (sigma - 1.0) / (1.0 + delta) ** (sigma + 1.0)


def eval_concave(g: ConcaveSpec, z) -> ArrayLike:
    """
    Evaluate the concave component g(z).

    Args:
        g: Concave component
        z: Nonnegative scalar or array

    Returns:
        g(z) with the shape of z

    Raises:
        DomainError: If any z is negative
    """
    z, scalar = _as_domain(z)
    sigma = g.sigma
    kind = g.kind

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is ConcaveKind.HCAVE:
            knot = sigma**2 / 2
            out = np.where(z <= knot, z, sigma * np.sqrt(2 * z) - knot)
        elif kind is ConcaveKind.ACAVE:
            r = np.sqrt(2 * z) / sigma
            out = np.where(r <= math.pi, sigma**2 * (1 - np.cos(r)), 2 * sigma**2)
        elif kind is ConcaveKind.BCAVE:
            t = np.clip(1 - 2 * z / sigma**2, 0.0, None)
            out = sigma**2 / 6 * (1 - t**3)
        elif kind is ConcaveKind.CCAVE:
            out = -(sigma**2) * np.expm1(-z / sigma**2)
        elif kind is ConcaveKind.DCAVE:
            c = math.exp(-sigma)
            out = (np.log1p(z) - np.log1p(z * c)) / -math.expm1(-sigma)
        elif kind is ConcaveKind.ECAVE:
            delta = g.delta
            slope = ecave_slope(sigma, delta)
            upper = 2 * (erf(np.sqrt(z / sigma)) - math.erf(math.sqrt(delta / sigma)))
            out = np.where(z <= delta, slope * z, upper + slope * delta)
        elif kind is ConcaveKind.GCAVE:
            delta = g.delta
            slope = gcave_slope(sigma, delta)
            base = (delta / (1 + delta)) ** sigma
            upper = ((z / (1 + z)) ** sigma - base) / sigma
            out = np.where(z <= delta, slope * z, upper + slope * delta)
        else:
            out = np.minimum(z, sigma)

    return _restore(np.asarray(out, dtype=float), scalar)


def neg_subgradient(g: ConcaveSpec, z) -> ArrayLike:
    """
    Return an element v of the subdifferential of -g at z.

    At the tcave kink z = sigma the value -1 is returned, so the point is
    kept. At z = 0 the right limit of g' is used.

    Args:
        g: Concave component
        z: Nonnegative scalar or array

    Returns:
        v <= 0 with the shape of z

    Raises:
        DomainError: If any z is negative
    """
    z, scalar = _as_domain(z)
    sigma = g.sigma
    kind = g.kind

    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        if kind is ConcaveKind.HCAVE:
            knot = sigma**2 / 2
            safe = np.where(z > knot, z, 1.0)
            out = np.where(z <= knot, -1.0, -sigma / np.sqrt(2 * safe))
        elif kind is ConcaveKind.ACAVE:
            r = np.sqrt(2 * z) / sigma
            safe = np.where(z > 0, z, 1.0)
            inner = -sigma * np.sin(r) / np.sqrt(2 * safe)
            out = np.where(z == 0, -1.0, np.where(r <= math.pi, inner, 0.0))
        elif kind is ConcaveKind.BCAVE:
            out = np.where(z <= sigma**2 / 2, -((2 * z - sigma**2) ** 2) / sigma**4, 0.0)
        elif kind is ConcaveKind.CCAVE:
            out = -np.exp(-z / sigma**2)
        elif kind is ConcaveKind.DCAVE:
            out = -1.0 / ((1 + z) * (1 + z * math.exp(-sigma)))
        elif kind is ConcaveKind.ECAVE:
            delta = g.delta
            safe = np.where(z > delta, z, 1.0)
            upper = -2 * np.exp(-safe / sigma) / np.sqrt(math.pi * sigma * safe)
            out = np.where(z <= delta, -ecave_slope(sigma, delta), upper)
        elif kind is ConcaveKind.GCAVE:
            delta = g.delta
            safe = np.where(z > delta, z, 1.0)
            upper = -(safe ** (sigma - 1)) / (1 + safe) ** (sigma + 1)
            out = np.where(z <= delta, -gcave_slope(sigma, delta), upper)
        else:
            out = np.where(z <= sigma, -1.0, 0.0)

    # -0.0 from the branches above is normalized for clean CSV output
    out = np.asarray(out, dtype=float) + 0.0
    return _restore(out, scalar)


def concave_weight(g: ConcaveSpec, z) -> ArrayLike:
    """Observation weight -v at z."""
    v = neg_subgradient(g, z)
    return -v + 0.0


def max_weight(g: ConcaveSpec) -> float:
    """Weight at the origin, the largest weight g assigns."""
    return float(-neg_subgradient(g, 0.0))


def concave_supremum(g: ConcaveSpec) -> float:
    """
    Least upper bound of g on [0, inf).

    Returns:
        The supremum (math.inf for hcave and for tcave with sigma = inf)
    """
    sigma = g.sigma
    kind = g.kind
    if kind is ConcaveKind.HCAVE:
        return math.inf
    if kind is ConcaveKind.ACAVE:
        return 2 * sigma**2
    if kind is ConcaveKind.BCAVE:
        return sigma**2 / 6
    if kind is ConcaveKind.CCAVE:
        return sigma**2
    if kind is ConcaveKind.DCAVE:
        return sigma / -math.expm1(-sigma)
    if kind is ConcaveKind.ECAVE:
        delta = g.delta
        return 2 * (1 - math.erf(math.sqrt(delta / sigma))) + ecave_slope(sigma, delta) * delta
    if kind is ConcaveKind.GCAVE:
        delta = g.delta
        base = (delta / (1 + delta)) ** sigma
        return (1 - base) / sigma + gcave_slope(sigma, delta) * delta
    return sigma


def concave_knots(g: ConcaveSpec) -> Tuple[float, ...]:
    """
    Points z > 0 where g is not twice continuously differentiable.

    Returns:
        Tuple of knot locations (empty for ccave and dcave)
    """
    sigma = g.sigma
    kind = g.kind
    if kind in (ConcaveKind.HCAVE, ConcaveKind.BCAVE):
        return (sigma**2 / 2,)
    if kind is ConcaveKind.ACAVE:
        return (sigma**2 * math.pi**2 / 2,)
    if kind in (ConcaveKind.ECAVE, ConcaveKind.GCAVE):
        return (g.delta,) if g.delta > 0 else ()
    if kind is ConcaveKind.TCAVE:
        return (sigma,) if math.isfinite(sigma) else ()
    return ()


def is_differentiable(g: ConcaveSpec) -> bool:
    """Whether g has a continuous first derivative on (0, inf)."""
    return g.kind is not ConcaveKind.TCAVE
