"""
Unit tests for the numerical diagnostics and curve tables.
"""

import csv
import math
import os
import tempfile

import numpy as np
import pytest
from scipy.special import expit

from src.diagnostics import (
    ara_curve,
    check_concavity,
    check_fisher,
    check_majorization,
    check_tcave_biconjugate,
    fisher_conditions,
    loss_curve,
    tcave_conjugate,
    weight_curve,
    write_curve,
)
from src.exceptions import ValidationError
from src.losses import max_weight
from src.models import CompositeLoss, ConcaveKind, ConcaveSpec, ConvexKind, ConvexSpec

SIGMAS = {
    ConcaveKind.HCAVE: 1.3,
    ConcaveKind.ACAVE: 0.9,
    ConcaveKind.BCAVE: 4.7,
    ConcaveKind.CCAVE: 1.5,
    ConcaveKind.DCAVE: 0.5,
    ConcaveKind.ECAVE: 1.5,
    ConcaveKind.GCAVE: 1.5,
    ConcaveKind.TCAVE: 1.0,
}
KINDS = list(SIGMAS)
IDS = [k.value for k in KINDS]
U_GRID = np.linspace(-5.0, 5.0, 1001)
P_GRID = np.linspace(0.05, 0.95, 19)


def _loss(kind, convex=ConvexKind.GAUSSIAN, sigma=None):
    return CompositeLoss(
        ConcaveSpec(kind, SIGMAS[kind] if sigma is None else sigma), ConvexSpec(convex)
    )


class TestConcavity:
    """Test the relative-concavity check."""

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize(
        "convex", [ConvexKind.GAUSSIAN, ConvexKind.BINOMIAL, ConvexKind.HINGE]
    )
    def test_cc_losses_pass(self, kind, convex):
        """Test every concave-convex composite satisfies the inequality."""
        report = check_concavity(_loss(kind, convex), U_GRID)
        assert report.passed(1e-6)
        assert report.u.size + report.excluded == U_GRID.size

    def test_convex_outer_function_fails(self):
        """Test an increasing convex outer function is detected."""
        report = check_concavity(
            _loss(ConcaveKind.CCAVE), U_GRID, concave_derivative=lambda z: np.exp(z)
        )
        assert not report.passed()
        assert report.max_violation > 1.0

    def test_hinge_flat_piece_excluded(self):
        """Test points where s' vanishes are skipped."""
        report = check_concavity(_loss(ConcaveKind.CCAVE, ConvexKind.HINGE), U_GRID)
        assert np.all(report.u < 1.0)
        assert report.excluded >= 400

    def test_nothing_left(self):
        """Test a grid entirely on the flat piece is rejected."""
        with pytest.raises(ValidationError):
            check_concavity(
                _loss(ConcaveKind.CCAVE, ConvexKind.HINGE), np.linspace(2.0, 3.0, 11)
            )

    def test_poisson_rejected(self):
        """Test poisson has no margin form to check."""
        with pytest.raises(ValidationError):
            check_concavity(_loss(ConcaveKind.CCAVE, ConvexKind.POISSON), U_GRID)

    def test_report_dict(self):
        """Test the serializable summary."""
        data = check_concavity(_loss(ConcaveKind.DCAVE), U_GRID).to_dict()
        assert data["check"] == "concavity"
        assert data["points"] + data["excluded"] == U_GRID.size


class TestFisher:
    """Test the classification-calibration check."""

    @pytest.mark.parametrize("kind", KINDS[:-1], ids=IDS[:-1])
    def test_logistic_composites(self, kind):
        """Test smooth composite logistic losses are covered and sign-correct."""
        loss = _loss(kind, ConvexKind.BINOMIAL)
        report = check_fisher(loss, P_GRID, grid_size=4001)
        assert report.covered, report.reasons
        assert report.all_signs_match
        assert report.p.size == 18

    def test_least_squares_composite(self):
        """Test the gaussianC composite with ccave."""
        report = check_fisher(_loss(ConcaveKind.CCAVE, ConvexKind.GAUSSIAN_C), P_GRID)
        assert report.covered
        assert report.all_signs_match

    def test_tcave_hinge_at_one(self):
        """Test tcave(1) with the hinge is covered: s(0) = sigma and s is nonincreasing."""
        loss = _loss(ConcaveKind.TCAVE, ConvexKind.HINGE, sigma=1.0)
        assert fisher_conditions(loss) == []
        assert check_fisher(loss, P_GRID).all_signs_match

    def test_tcave_hinge_other_sigma_not_covered(self):
        """Test tcave with sigma != s(0) is outside the sufficient conditions."""
        loss = _loss(ConcaveKind.TCAVE, ConvexKind.HINGE, sigma=0.5)
        report = check_fisher(loss, P_GRID)
        assert not report.covered
        assert report.reasons

    def test_invalid_inputs(self):
        """Test p outside (0, 1) and regression losses are rejected."""
        with pytest.raises(ValidationError):
            check_fisher(_loss(ConcaveKind.CCAVE, ConvexKind.BINOMIAL), [0.0, 0.3])
        with pytest.raises(ValidationError):
            check_fisher(_loss(ConcaveKind.CCAVE), P_GRID)

    def test_report_dict(self):
        """Test the serializable summary lists the minimizers."""
        report = check_fisher(_loss(ConcaveKind.CCAVE, ConvexKind.HINGE), [0.2, 0.8])
        data = report.to_dict()
        assert data["check"] == "fisher"
        assert len(data["minimizers"]) == 2


class TestConjugate:
    """Test the tcave conjugate pair and the tangent majorizer."""

    def test_conjugate_values(self):
        """Test phi on and off its domain."""
        assert tcave_conjugate(-0.5, 2.0) == pytest.approx(1.0)
        assert tcave_conjugate(0.0, 2.0) == pytest.approx(2.0)
        assert math.isinf(tcave_conjugate(0.5, 1.0))
        assert math.isinf(tcave_conjugate(-1.5, 1.0))

    @pytest.mark.parametrize("sigma", [0.0, 0.5, 1.0, 4.0])
    def test_biconjugate_recovers_tcave(self, sigma):
        """Test the biconjugate equals min(sigma, z) with the indicator optimizer."""
        z = np.array([0.0, 0.25, 0.5, 0.999, 1.0, 1.5, 3.0, 10.0])
        report = check_tcave_biconjugate(sigma, z)
        assert report.max_error < 1e-12
        assert report.optimizer_matches
        assert report.to_dict()["sigma"] == sigma

    @pytest.mark.parametrize("kind", KINDS, ids=IDS)
    @pytest.mark.parametrize("anchor", [0.0, 0.3, 1.0, 2.5, 9.0])
    def test_majorizer(self, kind, anchor):
        """Test the tangent majorizer lies above g and touches it at the anchor."""
        g = ConcaveSpec(kind, SIGMAS[kind])
        report = check_majorization(g, anchor, np.linspace(0.0, 20.0, 2001))
        assert report.holds(1e-10), report


class TestCurves:
    """Test the curve tables."""

    def test_weight_curve(self):
        """Test the weight curve starts at the largest weight."""
        g = ConcaveSpec(ConcaveKind.HCAVE, 1.3)
        rows = weight_curve(g, np.linspace(0.0, 5.0, 51))
        assert len(rows) == 51
        assert rows[0].value == pytest.approx(max_weight(g))
        assert rows[0].component == "hcave"
        assert rows[0].sigma == 1.3
        assert all(a.value >= b.value for a, b in zip(rows, rows[1:]))

    def test_ara_gaussian(self):
        """Test ARA(u) = -1/u for the gaussian component."""
        rows = ara_curve(ConvexSpec(ConvexKind.GAUSSIAN), [-2.0, -0.5, 0.0, 0.5, 2.0])
        assert [r.x for r in rows] == [-2.0, -0.5, 0.5, 2.0]
        np.testing.assert_allclose([r.value for r in rows], [0.5, 2.0, -2.0, -0.5], atol=1e-6)

    def test_ara_logistic(self):
        """Test ARA(u) = expit(u) for the logistic margin loss."""
        u = np.linspace(-4.0, 4.0, 17)
        rows = ara_curve(ConvexSpec(ConvexKind.BINOMIAL), u)
        np.testing.assert_allclose([r.value for r in rows], expit(u), atol=1e-8)

    def test_ara_hinge(self):
        """Test the hinge has zero ARA left of its kink and no rows beyond it."""
        rows = ara_curve(ConvexSpec(ConvexKind.HINGE), np.linspace(-2.0, 2.0, 41))
        assert all(r.x < 1.0 for r in rows)
        assert all(r.value == 0.0 for r in rows)

    def test_normalized_loss_curve(self):
        """Test the normalized curve passes through 1 at the origin."""
        loss = _loss(ConcaveKind.CCAVE, ConvexKind.HINGE)
        rows = loss_curve(loss, [-1.0, 0.0, 1.0], normalize=True)
        assert rows[1].value == pytest.approx(1.0)
        assert rows[2].value == pytest.approx(0.0)
        assert rows[0].component == loss.label

    def test_loss_curve_with_convex_rows(self):
        """Test s(u) rows are appended on request."""
        loss = _loss(ConcaveKind.CCAVE, ConvexKind.BINOMIAL)
        rows = loss_curve(loss, [0.0, 1.0], include_convex=True)
        assert [r.component for r in rows] == [loss.label] * 2 + ["binomial"] * 2
        assert rows[2].value == pytest.approx(math.log(2.0))
        assert rows[2].sigma is None

    def test_cannot_normalize_at_zero(self):
        """Test normalizing fails when Gamma(0) = 0."""
        with pytest.raises(ValidationError):
            loss_curve(_loss(ConcaveKind.CCAVE), [0.0, 1.0], normalize=True)

    def test_write_curve(self):
        """Test the CSV layout, with an empty sigma for convex rows."""
        rows = ara_curve(ConvexSpec(ConvexKind.GAUSSIAN), [1.0, 2.0])
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "curves", "ara.csv")
            write_curve(path, rows)
            with open(path, newline="") as f:
                table = list(csv.DictReader(f))
        assert list(table[0]) == ["x", "value", "component", "sigma"]
        assert table[0]["sigma"] == ""
        assert float(table[1]["value"]) == pytest.approx(-0.5)
