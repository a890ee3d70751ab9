"""
Numerical checks and plot-ready curves for composite losses.

- check_concavity: s''(u)/s'(u) Gamma'(u) >= Gamma''(u) on smooth pieces
- check_fisher: sign of the conditional-risk minimizer equals sign(p - 1/2)
- tcave_conjugate / check_tcave_biconjugate: conjugate of -min(sigma, z)
- check_majorization: tangent majorizer of g built from its conjugate
- weight_curve, ara_curve, loss_curve: tables with columns x, value, component, sigma
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from src.exceptions import ValidationError
from src.losses.composite import eval_composite
from src.losses.concave import concave_knots, concave_weight, eval_concave, neg_subgradient
from src.losses.convex import convex_derivative, convex_knots, eval_convex
from src.models import CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec
from src.utils import write_rows

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
KNOT_MARGIN = 1e-4
MIN_SLOPE = 1e-4
CLASSIFICATION_CONVEX = (ConvexKind.GAUSSIAN_C, ConvexKind.BINOMIAL, ConvexKind.HINGE)


@dataclass
class ConcavityReport:
    """
    Result of check_concavity.

    Attributes:
        max_violation: Largest Gamma'' - s''/s' Gamma' over the kept grid points
        u: Kept grid points
        violation: Per-point values
        excluded: Number of grid points dropped near knots or flat pieces
    """

    max_violation: float
    u: np.ndarray
    violation: np.ndarray
    excluded: int

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_violation <= tol

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": "concavity",
            "max_violation": self.max_violation,
            "points": int(self.u.size),
            "excluded": self.excluded,
        }


@dataclass
class FisherReport:
    """
    Result of check_fisher.

    Attributes:
        all_signs_match: Every minimizer has the sign of p - 1/2
        covered: Whether the sufficient conditions of the consistency result hold
        p: Probabilities evaluated (0.5 skipped)
        minimizers: Grid minimizer of the conditional risk per p
    """

    all_signs_match: bool
    covered: bool
    p: np.ndarray
    minimizers: np.ndarray
    reasons: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": "fisher",
            "all_signs_match": self.all_signs_match,
            "covered": self.covered,
            "reasons": list(self.reasons),
            "p": [float(x) for x in self.p],
            "minimizers": [float(x) for x in self.minimizers],
        }


@dataclass
class BiconjugateReport:
    """Result of check_tcave_biconjugate."""

    sigma: float
    max_error: float
    optimizer_matches: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            "check": "conjugate",
            "sigma": self.sigma,
            "max_error": self.max_error,
            "optimizer_matches": self.optimizer_matches,
        }


@dataclass
class MajorizationReport:
    """
    Result of check_majorization.

    Attributes:
        max_gap: Largest g(z') - majorizer(z') over the grid (<= 0 when it holds)
        touch_gap: |majorizer(z) - g(z)| at the anchor
    """

    max_gap: float
    touch_gap: float

    def holds(self, tol: float = 1e-10) -> bool:
        return self.max_gap <= tol and self.touch_gap <= tol


@dataclass(frozen=True)
class CurveRow:
    """One row of a curve table."""

    x: float
    value: float
    component: str
    sigma: Optional[float]

    FIELDS = ("x", "value", "component", "sigma")

    def to_dict(self) -> Dict[str, object]:
        sigma = "" if self.sigma is None else self.sigma
        return {"x": self.x, "value": self.value, "component": self.component, "sigma": sigma}


def _composite_slope(
    loss: CompositeLoss,
    u: np.ndarray,
    concave_derivative: Optional[Callable[[np.ndarray], np.ndarray]],
) -> np.ndarray:
    z = np.maximum(np.asarray(eval_convex(loss.convex, u), dtype=float), 0.0)
    if concave_derivative is None:
        g_prime = -np.asarray(neg_subgradient(loss.concave, z), dtype=float)
    else:
        g_prime = np.asarray(concave_derivative(z), dtype=float)
    return g_prime * np.asarray(convex_derivative(loss.convex, u), dtype=float)


def _near_knot(
    loss: CompositeLoss, u: np.ndarray, margin: float, z_knots: Sequence[float]
) -> np.ndarray:
    near = np.zeros(u.shape, dtype=bool)
    for knot in convex_knots(loss.convex):
        near |= np.abs(u - knot) < margin
    if z_knots:
        lower = np.asarray(eval_convex(loss.convex, u - margin), dtype=float)
        upper = np.asarray(eval_convex(loss.convex, u + margin), dtype=float)
        center = np.asarray(eval_convex(loss.convex, u), dtype=float)
        for knot in z_knots:
            low = np.minimum(np.minimum(lower, upper), center)
            high = np.maximum(np.maximum(lower, upper), center)
            near |= (low <= knot) & (knot <= high)
    return near


def check_concavity(
    loss: CompositeLoss,
    u_grid,
    fd_step: float = FD_STEP,
    knot_margin: float = KNOT_MARGIN,
    concave_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> ConcavityReport:
    """
    Check s''(u)/s'(u) Gamma'(u) >= Gamma''(u) on a grid.

    Second derivatives are central differences of the analytic first
    derivatives. Points within knot_margin of a knot of s, points whose
    neighbourhood crosses a knot of g, and points with |s'(u)| < 1e-4 are
    skipped.

    Args:
        loss: Composite loss (exponential-family components in margin form)
        u_grid: Evaluation points
        fd_step: Finite-difference step
        knot_margin: Exclusion margin around knots
        concave_derivative: Replacement for g' (used to inject non-concave controls)

    Returns:
        ConcavityReport

    Raises:
        ValidationError: If no grid point survives the exclusions
    """
    if loss.convex.kind is ConvexKind.POISSON:
        raise ValidationError("check_concavity needs a margin loss; poisson depends on y")
    u = np.asarray(u_grid, dtype=float).ravel()
    z_knots = () if concave_derivative is not None else concave_knots(loss.concave)

    s_prime = np.asarray(convex_derivative(loss.convex, u), dtype=float)
    keep = (np.abs(s_prime) >= MIN_SLOPE) & ~_near_knot(loss, u, knot_margin, z_knots)
    if not np.any(keep):
        raise ValidationError("no grid points left after excluding knots and flat pieces")
    u, s_prime = u[keep], s_prime[keep]

    s_second = (
        np.asarray(convex_derivative(loss.convex, u + fd_step), dtype=float)
        - np.asarray(convex_derivative(loss.convex, u - fd_step), dtype=float)
    ) / (2 * fd_step)
    gamma_prime = _composite_slope(loss, u, concave_derivative)
    gamma_second = (
        _composite_slope(loss, u + fd_step, concave_derivative)
        - _composite_slope(loss, u - fd_step, concave_derivative)
    ) / (2 * fd_step)

    violation = gamma_second - s_second / s_prime * gamma_prime
    report = ConcavityReport(
        max_violation=float(np.max(violation)),
        u=u,
        violation=violation,
        excluded=int(np.size(keep) - np.count_nonzero(keep)),
    )
    logger.debug("%s: max concavity violation %.3g", loss.label, report.max_violation)
    return report


def fisher_conditions(loss: CompositeLoss) -> List[str]:
    """
    Reasons why the sufficient consistency conditions fail (empty when covered).

    Requires s'(0) < 0 and s(u) < s(-u) for u > 0, plus g'(s(0)) > 0 for a
    differentiable g, or s(0) = sigma with s nonincreasing for tcave.
    """
    reasons = []
    s = loss.convex
    if float(convex_derivative(s, 0.0)) >= 0:
        reasons.append("s'(0) is not negative")
    u = np.linspace(1e-3, 10.0, 1000)
    if not np.all(np.asarray(eval_convex(s, u)) < np.asarray(eval_convex(s, -u))):
        reasons.append("s(u) < s(-u) fails for some u > 0")
    s0 = float(eval_convex(s, 0.0))
    if loss.concave.kind is ConcaveKind.TCAVE:
        grid = np.linspace(-10.0, 10.0, 2001)
        nonincreasing = np.all(np.diff(np.asarray(eval_convex(s, grid))) <= 1e-12)
        if not (math.isclose(s0, loss.concave.sigma) and nonincreasing):
            reasons.append("g'(s(0)) does not exist for tcave at this sigma")
    elif -float(neg_subgradient(loss.concave, s0)) <= 0:
        reasons.append("g'(s(0)) is not positive")
    return reasons


def check_fisher(
    loss: CompositeLoss,
    p_grid,
    grid_min: float = -10.0,
    grid_max: float = 10.0,
    grid_size: int = 20001,
) -> FisherReport:
    """
    Minimize p Gamma(w) + (1 - p) Gamma(-w) over a dense grid for each p.

    Args:
        loss: Classification composite (gaussianC, binomial or hinge)
        p_grid: Probabilities in (0, 1); p = 0.5 is skipped
        grid_min: Lower end of the w grid
        grid_max: Upper end of the w grid
        grid_size: Number of grid points

    Returns:
        FisherReport; `covered` tells whether the consistency result applies
    """
    if loss.convex.kind not in CLASSIFICATION_CONVEX:
        raise ValidationError(
            f"check_fisher needs a classification loss, not {loss.convex.kind.value}"
        )
    p = np.asarray(p_grid, dtype=float).ravel()
    if np.any((p <= 0) | (p >= 1)):
        raise ValidationError("p values must lie in (0, 1)")
    p = p[~np.isclose(p, 0.5)]

    w = np.linspace(grid_min, grid_max, grid_size)
    plus = np.asarray(eval_composite(loss, w), dtype=float)
    minus = np.asarray(eval_composite(loss, -w), dtype=float)
    minimizers = np.array([w[np.argmin(pi * plus + (1 - pi) * minus)] for pi in p])
    matches = np.sign(minimizers) == np.sign(p - 0.5)

    reasons = fisher_conditions(loss)
    return FisherReport(
        all_signs_match=bool(np.all(matches)),
        covered=not reasons,
        p=p,
        minimizers=minimizers,
        reasons=reasons,
    )


def tcave_conjugate(v, sigma: float):
    """
    Conjugate phi(v) = sigma (v + 1) on [-1, 0], +inf elsewhere.

    Args:
        v: Scalar or array
        sigma: tcave threshold (>= 0)

    Returns:
        phi(v) with the shape of v
    """
    v = np.asarray(v, dtype=float)
    inside = (v >= -1.0) & (v <= 0.0)
    with np.errstate(invalid="ignore"):
        out = np.where(inside, sigma * (v + 1.0), math.inf)
    return float(out) if out.ndim == 0 else out


def check_tcave_biconjugate(sigma: float, z_grid, v_grid=None) -> BiconjugateReport:
    """
    Verify inf_v (z (-v) + phi(v)) = min(sigma, z) with optimizer v = -I(z <= sigma).

    Args:
        sigma: tcave threshold
        z_grid: Nonnegative z values
        v_grid: Candidate v values (default: 1001 points on [-1, 0], endpoints included)

    Returns:
        BiconjugateReport
    """
    z = np.asarray(z_grid, dtype=float).ravel()
    v = np.linspace(-1.0, 0.0, 1001) if v_grid is None else np.asarray(v_grid, dtype=float)
    surface = z[:, None] * (-v[None, :]) + tcave_conjugate(v, sigma)[None, :]
    values = surface.min(axis=1)
    # ties go to the most negative v, so the kink z = sigma keeps v = -1
    ties = surface <= values[:, None] + 1e-12 * (1.0 + np.abs(values[:, None]))
    best = np.argmax(ties, axis=1)
    target = np.minimum(sigma, z)
    expected_v = np.where(z <= sigma, -1.0, 0.0)
    return BiconjugateReport(
        sigma=float(sigma),
        max_error=float(np.max(np.abs(values - target))),
        optimizer_matches=bool(np.all(v[best] == expected_v)),
    )


def check_majorization(g: ConcaveSpec, z: float, z_grid) -> MajorizationReport:
    """
    Check g(z') <= z' (-v) + phi(v) on a grid with equality at z' = z.

    Here v = neg_subgradient(g, z) and phi(v) = z v + g(z).

    Args:
        g: Concave component
        z: Anchor point
        z_grid: Nonnegative test points

    Returns:
        MajorizationReport
    """
    v = float(neg_subgradient(g, z))
    phi = z * v + float(eval_concave(g, z))
    grid = np.asarray(z_grid, dtype=float)
    majorizer = grid * (-v) + phi
    gap = np.asarray(eval_concave(g, grid), dtype=float) - majorizer
    touch = abs(z * (-v) + phi - float(eval_concave(g, z)))
    return MajorizationReport(max_gap=float(np.max(gap)), touch_gap=touch)


def weight_curve(g: ConcaveSpec, z_grid) -> List[CurveRow]:
    """Tabulate the weight -neg_subgradient(g, z)."""
    z = np.asarray(z_grid, dtype=float).ravel()
    values = np.asarray(concave_weight(g, z), dtype=float)
    return [CurveRow(float(x), float(w), g.kind.value, g.sigma) for x, w in zip(z, values)]


def ara_curve(s: ConvexSpec, u_grid, fd_step: float = FD_STEP) -> List[CurveRow]:
    """
    Tabulate ARA(u) = -s''(u)/s'(u), skipping points where s'(u) = 0.

    s'' is the central difference of the analytic s'.
    """
    if s.kind is ConvexKind.POISSON:
        raise ValidationError("ara_curve needs a margin loss; poisson depends on y")
    u = np.asarray(u_grid, dtype=float).ravel()
    slope = np.asarray(convex_derivative(s, u), dtype=float)
    keep = np.abs(slope) > 1e-12
    for knot in convex_knots(s):
        keep &= np.abs(u - knot) >= fd_step
    u, slope = u[keep], slope[keep]
    second = (
        np.asarray(convex_derivative(s, u + fd_step), dtype=float)
        - np.asarray(convex_derivative(s, u - fd_step), dtype=float)
    ) / (2 * fd_step)
    values = -second / slope + 0.0
    return [CurveRow(float(x), float(a), s.kind.value, None) for x, a in zip(u, values)]


def loss_curve(
    loss: CompositeLoss, u_grid, normalize: bool = False, include_convex: bool = False
) -> List[CurveRow]:
    """
    Tabulate Gamma(u), optionally divided by g(s(0)) so the curve passes through 1 at u = 0.

    Args:
        loss: Composite loss in margin form
        u_grid: Evaluation points
        normalize: Divide by g(s(0)) (presentation only)
        include_convex: Also emit s(u) rows

    Returns:
        Curve rows

    Raises:
        ValidationError: If normalize is requested but g(s(0)) = 0
    """
    if loss.convex.kind is ConvexKind.POISSON:
        raise ValidationError("loss_curve needs a margin loss; poisson depends on y")
    u = np.asarray(u_grid, dtype=float).ravel()
    values = np.asarray(eval_composite(loss, u), dtype=float)
    scale = 1.0
    if normalize:
        scale = float(eval_composite(loss, 0.0))
        if scale == 0:
            raise ValidationError(f"cannot normalize {loss.label}: g(s(0)) = 0")
    rows = [
        CurveRow(float(x), float(val / scale), loss.label, loss.concave.sigma)
        for x, val in zip(u, values)
    ]
    if include_convex:
        convex = np.asarray(eval_convex(loss.convex, u), dtype=float) / scale
        name = loss.convex.kind.value
        rows.extend(CurveRow(float(x), float(val), name, None) for x, val in zip(u, convex))
    return rows


def write_curve(path: str, rows: Sequence[CurveRow], float_format: str = "%.10g") -> None:
    """Write curve rows as CSV with columns x, value, component, sigma."""
    write_rows(path, CurveRow.FIELDS, (row.to_dict() for row in rows), float_format)
