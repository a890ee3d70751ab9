"""
Estimator definitions for the Monte-Carlo harness and the default sets of
each example.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from src.exceptions import ValidationError
from src.models import (
    Algorithm,
    CompositeLoss,
    ConcaveKind,
    ConcaveSpec,
    ConvexKind,
    ConvexSpec,
    Example,
    PenaltyFamily,
)


class Reference:
    """Names of the reference rows that involve no fitting."""

    ORACLE = "oracle"
    BAYES = "bayes"


@dataclass(frozen=True)
class EstimatorSpec:
    """
    One row of a simulation table.

    Attributes:
        name: Row label
        loss: Composite loss (None for reference rows)
        penalty_family: LASSO or SCAD for tuned fits, None for unpenalized fits
        alpha: Penalty mixing weight
        algorithm: Outer loop
        trim_h: Kept observations for cocotv
        multistart: Use fit_multistart with least-squares and trimmed starts
        reference: Reference kind (oracle or bayes) for non-fitted rows
    """

    name: str
    loss: Optional[CompositeLoss] = None
    penalty_family: Optional[PenaltyFamily] = None
    alpha: float = 1.0
    algorithm: Algorithm = Algorithm.COCO
    trim_h: Optional[int] = None
    multistart: bool = False
    reference: Optional[str] = None

    def __post_init__(self):
        """Check that exactly one of loss and reference is given."""
        if (self.loss is None) == (self.reference is None):
            raise ValidationError(f"estimator {self.name!r} needs either a loss or a reference")
        if self.reference not in (None, Reference.ORACLE, Reference.BAYES):
            raise ValidationError(f"unknown reference row {self.reference!r}")

    @property
    def penalized(self) -> bool:
        return self.penalty_family is not None


# sigma values of the reported tables, per example
DEFAULT_SIGMAS: Dict[Example, Tuple[Tuple[ConcaveKind, float], ...]] = {
    Example.EX1: (
        (ConcaveKind.HCAVE, 1.3),
        (ConcaveKind.ACAVE, 0.9),
        (ConcaveKind.BCAVE, 4.7),
        (ConcaveKind.CCAVE, 1.5),
        (ConcaveKind.DCAVE, 0.5),
        (ConcaveKind.ECAVE, 1.5),
        (ConcaveKind.GCAVE, 1.5),
        (ConcaveKind.TCAVE, 1.0),
    ),
    Example.EX2: (
        (ConcaveKind.HCAVE, 0.5),
        (ConcaveKind.ACAVE, 0.9),
        (ConcaveKind.BCAVE, 4.7),
        (ConcaveKind.CCAVE, 1.5),
        (ConcaveKind.DCAVE, 0.5),
        (ConcaveKind.ECAVE, 9.0),
        (ConcaveKind.GCAVE, 1.5),
        (ConcaveKind.TCAVE, 2.5),
    ),
    Example.EX3: (
        (ConcaveKind.HCAVE, 1.0),
        (ConcaveKind.ACAVE, 1.0),
        (ConcaveKind.BCAVE, 3.5),
        (ConcaveKind.CCAVE, 1.5),
        (ConcaveKind.DCAVE, 4.5),
        (ConcaveKind.ECAVE, 9.0),
        (ConcaveKind.GCAVE, 1.5),
        (ConcaveKind.TCAVE, 1.0),
    ),
}


def base_convex(example: Example) -> ConvexSpec:
    """Convex component used by an example's estimators."""
    if example is Example.EX3:
        return ConvexSpec(ConvexKind.GAUSSIAN_C)
    return ConvexSpec(ConvexKind.GAUSSIAN)


def least_squares_loss(convex: ConvexSpec) -> CompositeLoss:
    """Plain (unweighted) loss s(u), written as tcave with sigma = inf."""
    return CompositeLoss(ConcaveSpec(ConcaveKind.TCAVE, math.inf), convex)


def default_estimators(example: Example) -> List[EstimatorSpec]:
    """
    The rows reported for an example.

    ex1 compares unpenalized fits with the oracle; ex2 and ex3 tune a LASSO
    and a SCAD fit per loss. ex3 adds the Bayes rule.

    Args:
        example: Simulation design

    Returns:
        List of EstimatorSpec
    """
    convex = base_convex(example)
    rows: List[EstimatorSpec] = []

    if example is Example.EX1:
        rows.append(EstimatorSpec("Oracle", reference=Reference.ORACLE))
        rows.append(EstimatorSpec("LS", loss=least_squares_loss(convex)))
        for kind, sigma in DEFAULT_SIGMAS[example]:
            loss = CompositeLoss(ConcaveSpec(kind, sigma), convex)
            rows.append(EstimatorSpec(loss.concave.label, loss=loss, multistart=True))
        return rows

    if example is Example.EX3:
        rows.append(EstimatorSpec("Bayes", reference=Reference.BAYES))
    else:
        rows.append(EstimatorSpec("Oracle", reference=Reference.ORACLE))
    for family in (PenaltyFamily.LASSO, PenaltyFamily.SCAD):
        rows.append(
            EstimatorSpec(
                f"LS {family.value.upper()}",
                loss=least_squares_loss(convex),
                penalty_family=family,
            )
        )
    for kind, sigma in DEFAULT_SIGMAS[example]:
        loss = CompositeLoss(ConcaveSpec(kind, sigma), convex)
        for family in (PenaltyFamily.LASSO, PenaltyFamily.SCAD):
            rows.append(
                EstimatorSpec(
                    f"{loss.concave.label} {family.value.upper()}",
                    loss=loss,
                    penalty_family=family,
                )
            )
    return rows


def select_estimators(
    estimators: List[EstimatorSpec], names: Optional[Sequence[str]]
) -> List[EstimatorSpec]:
    """
    Keep the estimators whose name (or concave kind) is listed.

    Args:
        estimators: Candidate rows
        names: Names such as 'LS', 'ccave(1.5)', 'ccave' (None keeps all)

    Returns:
        Filtered list, in the original order

    Raises:
        ValidationError: If a name matches nothing
    """
    if not names:
        return list(estimators)
    wanted = [n.strip() for n in names if n.strip()]
    keep = [est for est in estimators if any(w in _tokens(est) for w in wanted)]
    unmatched = [w for w in wanted if not any(w in _tokens(e) for e in estimators)]
    if unmatched:
        valid = sorted({e.name.split(" ")[0] for e in estimators})
        raise ValidationError(f"unknown estimator(s) {unmatched}; valid names: {valid}")
    return keep


def _tokens(est: EstimatorSpec) -> set:
    tokens = {est.name, est.name.split(" ")[0]}
    if est.loss is not None:
        tokens.add(est.loss.concave.kind.value)
    return tokens
