"""
Unit tests for the weighted inner solvers.
"""

import numpy as np
import pytest

from src.exceptions import DegenerateProblemError, ValidationError
from src.models import (
    ConvexKind,
    ConvexSpec,
    Dataset,
    InnerProblem,
    InnerSettings,
    PenaltyFamily,
    PenaltySpec,
    TaskKind,
)
from src.solvers import (
    solve_inner,
    solve_weighted_gaussian,
    solve_weighted_glm,
    solve_weighted_piecewise,
    weighted_objective,
)
from src.solvers.inner import (
    lp_applicable,
    margin_map,
    solve_piecewise_lp,
    weighted_least_squares,
)


def _regression(n=60, p=3, seed=0):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, p))
    y = 1.0 + P @ np.array([2.0, -1.0, 0.0][:p]) + 0.5 * rng.normal(size=n)
    return Dataset.from_predictors(P, y, TaskKind.REGRESSION)


def _classification(n=80, p=2, seed=1):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(n, p))
    score = 0.5 + P @ np.array([1.5, -1.0][:p]) + rng.normal(size=n)
    y = np.where(score > 0, 1.0, -1.0)
    return Dataset.from_predictors(P, y, TaskKind.CLASSIFICATION)


def _weights(n, seed=2):
    return np.random.default_rng(seed).uniform(0.2, 1.5, size=n)


def _problem(data, convex, weights=None, penalty=None, warm_start=None, **kwargs):
    return InnerProblem(
        data=data,
        weights=np.ones(data.n) if weights is None else weights,
        convex=ConvexSpec(convex) if isinstance(convex, ConvexKind) else convex,
        penalty=penalty or PenaltySpec(),
        warm_start=np.zeros(data.q) if warm_start is None else warm_start,
        **kwargs,
    )


class TestInnerProblem:
    """Test validation of inner problems."""

    def test_negative_weights_rejected(self):
        """Test that weights must be nonnegative."""
        data = _regression()
        weights = np.ones(data.n)
        weights[0] = -1.0
        with pytest.raises(ValidationError):
            _problem(data, ConvexKind.GAUSSIAN, weights)

    def test_weight_length_checked(self):
        """Test that weights must match the number of rows."""
        data = _regression()
        with pytest.raises(ValidationError):
            _problem(data, ConvexKind.GAUSSIAN, np.ones(data.n - 1))

    def test_warm_start_length_checked(self):
        """Test that the warm start must match the number of coefficients."""
        data = _regression()
        with pytest.raises(ValidationError):
            InnerProblem(
                data=data,
                weights=np.ones(data.n),
                convex=ConvexSpec(ConvexKind.GAUSSIAN),
                penalty=PenaltySpec(),
                warm_start=np.zeros(data.q + 1),
            )

    def test_margin_map(self):
        """Test the affine map from linear predictor to margin."""
        data = _regression(n=5)
        offset, slope = margin_map(_problem(data, ConvexKind.GAUSSIAN))
        np.testing.assert_allclose(offset, data.y)
        np.testing.assert_allclose(slope, -np.ones(5))

        labels = _classification(n=6)
        offset, slope = margin_map(_problem(labels, ConvexKind.HINGE))
        np.testing.assert_allclose(offset, np.zeros(6))
        np.testing.assert_allclose(slope, labels.y)

    def test_penalty_scale_checked(self):
        """Test penalty_scale must hold one positive entry per coefficient."""
        data = _regression()
        with pytest.raises(ValidationError):
            _problem(data, ConvexKind.GAUSSIAN, penalty_scale=np.ones(data.q - 1))
        with pytest.raises(ValidationError):
            _problem(data, ConvexKind.GAUSSIAN, penalty_scale=np.zeros(data.q))


class TestWeightedLeastSquares:
    """Test the quadratic solver."""

    def test_unpenalized_matches_normal_equations(self):
        """Test the direct solve against weighted normal equations."""
        data = _regression()
        w = _weights(data.n)
        beta, sweeps, converged = weighted_least_squares(
            data.X, data.y, w, PenaltySpec(), np.zeros(data.q), True, 1e-10, 100
        )
        XtW = data.X.T * w
        expected = np.linalg.solve(XtW @ data.X, XtW @ data.y)
        np.testing.assert_allclose(beta, expected, atol=1e-8)
        assert converged
        assert sweeps == 1

    def test_ridge_coordinate_descent(self):
        """Test coordinate descent for pure ridge against the closed form."""
        data = _regression()
        w = _weights(data.n)
        lam = 0.3
        penalty = PenaltySpec(PenaltyFamily.LASSO, lam=lam, alpha=0.0)
        beta, _, converged = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-12, 100_000
        )
        n = data.n
        ridge = np.diag([0.0] + [lam] * data.p)
        XtW = data.X.T * w
        expected = np.linalg.solve(XtW @ data.X / n + ridge, XtW @ data.y / n)
        assert converged
        np.testing.assert_allclose(beta, expected, atol=1e-6)

    def test_lasso_kkt_conditions(self):
        """Test the LASSO solution satisfies the KKT conditions."""
        data = _regression(n=80, p=3, seed=5)
        w = _weights(data.n, seed=6)
        lam = 0.15
        penalty = PenaltySpec(PenaltyFamily.LASSO, lam=lam)
        beta, _, converged = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-12, 100_000
        )
        assert converged
        grad = data.X.T @ (w * (data.y - data.X @ beta)) / data.n
        assert abs(grad[0]) < 1e-8
        for j in range(1, data.q):
            if beta[j] != 0:
                assert grad[j] == pytest.approx(lam * np.sign(beta[j]), abs=1e-6)
            else:
                assert abs(grad[j]) <= lam + 1e-8

    def test_large_lambda_zeros_slopes(self):
        """Test a large LASSO penalty leaves only the weighted-mean intercept."""
        data = _regression()
        w = _weights(data.n)
        penalty = PenaltySpec(PenaltyFamily.LASSO, lam=100.0)
        beta, _, _ = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-10, 1000
        )
        np.testing.assert_array_equal(beta[1:], 0.0)
        assert beta[0] == pytest.approx(np.dot(w, data.y) / w.sum())

    def test_zero_weight_rows_are_ignored(self):
        """Test that rows with weight zero drop out of the fit."""
        data = _regression()
        w = np.ones(data.n)
        w[:10] = 0.0
        penalty = PenaltySpec(PenaltyFamily.LASSO, lam=0.05)
        beta, _, _ = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-12, 100_000
        )
        kept = data.subset(np.arange(10, data.n))
        # (1/2n) scaling differs from the subset's, so compare at matched lambda
        scaled = PenaltySpec(PenaltyFamily.LASSO, lam=0.05 * data.n / kept.n)
        expected, _, _ = weighted_least_squares(
            kept.X, kept.y, np.ones(kept.n), scaled, np.zeros(kept.q), True, 1e-12, 100_000
        )
        np.testing.assert_allclose(beta, expected, atol=1e-6)

    def test_penalty_scale_charges_original_coefficients(self):
        """Test fitting rescaled columns with penalty_scale matches the original LASSO fit."""
        data = _regression(n=80, p=3, seed=8)
        w = _weights(data.n, seed=9)
        penalty = PenaltySpec(PenaltyFamily.LASSO, lam=0.1)
        scale = np.array([1.0, 40.0, 0.05, 3.0])
        original, _, _ = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-13, 200_000
        )
        rescaled, _, converged = weighted_least_squares(
            data.X / scale, data.y, w, penalty, np.zeros(data.q), True, 1e-13, 200_000, scale
        )
        assert converged
        np.testing.assert_allclose(rescaled / scale, original, atol=1e-6)

    def test_scad_with_penalty_scale(self):
        """Test the SCAD update in the charged coordinate also matches the original fit."""
        data = _regression(n=80, p=3, seed=10)
        w = _weights(data.n, seed=11)
        penalty = PenaltySpec(PenaltyFamily.SCAD, lam=0.2)
        scale = np.array([1.0, 0.5, 4.0, 2.0])
        original, _, _ = weighted_least_squares(
            data.X, data.y, w, penalty, np.zeros(data.q), True, 1e-13, 200_000
        )
        rescaled, _, _ = weighted_least_squares(
            data.X / scale, data.y, w, penalty, np.zeros(data.q), True, 1e-13, 200_000, scale
        )
        np.testing.assert_allclose(rescaled / scale, original, atol=1e-6)

    @pytest.mark.parametrize("factor", [1e-3, 0.37, 25.0])
    def test_weight_scaling_leaves_unpenalized_argmin(self, factor):
        """Test multiplying every weight by a constant does not move the lambda = 0 fit."""
        data = _regression()
        w = _weights(data.n)
        args = (PenaltySpec(), np.zeros(data.q), True, 1e-10, 100)
        base, _, _ = weighted_least_squares(data.X, data.y, w, *args)
        scaled, _, _ = weighted_least_squares(data.X, data.y, factor * w, *args)
        np.testing.assert_allclose(scaled, base, atol=1e-8)

    def test_all_zero_weights(self):
        """Test that a problem with no weight is degenerate."""
        data = _regression()
        with pytest.raises(DegenerateProblemError):
            weighted_least_squares(
                data.X, data.y, np.zeros(data.n), PenaltySpec(), np.zeros(data.q), True, 1e-8, 10
            )


class TestGaussianSolver:
    """Test solve_weighted_gaussian and the dispatcher."""

    def test_dispatch_and_objective(self):
        """Test the result's objective is the weighted objective at beta."""
        data = _regression()
        problem = _problem(
            data, ConvexKind.GAUSSIAN, _weights(data.n), PenaltySpec(lam=0.1)
        )
        result = solve_inner(problem)
        assert result.method == "coordinate_descent"
        assert result.converged
        assert result.objective == pytest.approx(weighted_objective(problem, result.beta))

    def test_penalized_solve_satisfies_kkt(self):
        """Test a LASSO solve at lambda = 0.1 runs to convergence and meets the KKT conditions."""
        data = _regression(n=80, seed=12)
        lam = 0.1
        problem = _problem(data, ConvexKind.GAUSSIAN, penalty=PenaltySpec(lam=lam), tol=1e-12)
        result = solve_weighted_gaussian(problem)
        assert result.converged
        beta = result.beta
        grad = data.X.T @ (data.y - data.X @ beta) / data.n
        assert abs(grad[0]) < 1e-8
        for j in range(1, data.q):
            if beta[j] != 0:
                assert grad[j] == pytest.approx(lam * np.sign(beta[j]), abs=1e-6)
            else:
                assert abs(grad[j]) <= lam + 1e-6

    @pytest.mark.parametrize("convex", [ConvexKind.GAUSSIAN, ConvexKind.GAUSSIAN_C])
    def test_weight_scaling_through_dispatcher(self, convex):
        """Test scaled weights give the same unpenalized quadratic fit."""
        data = _regression() if convex is ConvexKind.GAUSSIAN else _classification()
        w = _weights(data.n)
        base = solve_inner(_problem(data, convex, w))
        scaled = solve_inner(_problem(data, convex, 4.2 * w))
        np.testing.assert_allclose(scaled.beta, base.beta, atol=1e-8)

    def test_gaussian_c_is_least_squares_on_labels(self):
        """Test gaussianC on +/-1 labels equals least squares on the labels."""
        data = _classification()
        result = solve_inner(_problem(data, ConvexKind.GAUSSIAN_C))
        expected, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
        np.testing.assert_allclose(result.beta, expected, atol=1e-8)

    def test_rejects_other_components(self):
        """Test the quadratic solver refuses non-quadratic components."""
        data = _classification()
        with pytest.raises(ValidationError):
            solve_weighted_gaussian(_problem(data, ConvexKind.HINGE))

    def test_degenerate_weights(self):
        """Test all-zero weights raise DegenerateProblemError."""
        data = _regression()
        with pytest.raises(DegenerateProblemError):
            solve_inner(_problem(data, ConvexKind.GAUSSIAN, np.zeros(data.n)))


class TestGlmSolver:
    """Test the penalized IRLS solver."""

    def test_binomial_stationary_point(self):
        """Test the unpenalized logistic fit zeroes the weighted score."""
        rng = np.random.default_rng(3)
        P = rng.normal(size=(120, 2))
        prob = 1 / (1 + np.exp(-(0.3 + P @ np.array([1.0, -0.8]))))
        y = (rng.uniform(size=120) < prob).astype(float)
        data = Dataset.from_predictors(P, y, TaskKind.BINOMIAL)
        w = _weights(data.n)
        result = solve_inner(_problem(data, ConvexKind.BINOMIAL, w, tol=1e-12))
        assert result.method == "irls"
        assert result.converged
        mu = 1 / (1 + np.exp(-(data.X @ result.beta)))
        score = data.X.T @ (w * (mu - y)) / data.n
        np.testing.assert_allclose(score, 0.0, atol=1e-6)

    def test_classification_margin_form_agrees(self):
        """Test the margin form on +/-1 labels matches the 0/1 GLM form."""
        labels = _classification()
        y01 = (labels.y + 1) / 2
        glm = Dataset(labels.X, y01, TaskKind.BINOMIAL)
        w = _weights(labels.n)
        margin_fit = solve_inner(_problem(labels, ConvexKind.BINOMIAL, w, tol=1e-12))
        glm_fit = solve_inner(_problem(glm, ConvexKind.BINOMIAL, w, tol=1e-12))
        np.testing.assert_allclose(margin_fit.beta, glm_fit.beta, atol=1e-5)

    def test_poisson_stationary_point(self):
        """Test the unpenalized poisson fit zeroes the weighted score."""
        rng = np.random.default_rng(4)
        P = rng.normal(size=(100, 2))
        y = rng.poisson(np.exp(0.5 + P @ np.array([0.4, -0.3]))).astype(float)
        data = Dataset.from_predictors(P, y, TaskKind.POISSON)
        w = _weights(data.n)
        result = solve_inner(_problem(data, ConvexKind.POISSON, w, tol=1e-12))
        score = data.X.T @ (w * (np.exp(data.X @ result.beta) - y)) / data.n
        np.testing.assert_allclose(score, 0.0, atol=1e-6)

    def test_penalty_shrinks_coefficients(self):
        """Test a LASSO penalty shrinks the logistic slopes."""
        labels = _classification()
        free = solve_inner(_problem(labels, ConvexKind.BINOMIAL))
        shrunk = solve_inner(
            _problem(labels, ConvexKind.BINOMIAL, penalty=PenaltySpec(lam=0.05))
        )
        assert np.abs(shrunk.beta[1:]).sum() < np.abs(free.beta[1:]).sum()

    def test_penalized_logistic_kkt(self):
        """Test the penalized IRLS answer meets the LASSO KKT conditions."""
        labels = _classification(n=120, p=2, seed=13)
        y01 = (labels.y + 1) / 2
        lam = 0.02
        w = _weights(labels.n, seed=14)
        problem = _problem(
            labels,
            ConvexKind.BINOMIAL,
            w,
            PenaltySpec(lam=lam),
            tol=1e-10,
            settings=InnerSettings(gaussian_tol=1e-12),
        )
        result = solve_weighted_glm(problem)
        assert result.converged
        mu = 1 / (1 + np.exp(-(labels.X @ result.beta)))
        grad = labels.X.T @ (w * (y01 - mu)) / labels.n
        assert abs(grad[0]) < 1e-5
        for j in range(1, labels.q):
            if result.beta[j] != 0:
                assert grad[j] == pytest.approx(lam * np.sign(result.beta[j]), abs=1e-5)
            else:
                assert abs(grad[j]) <= lam + 1e-5

    def test_weight_scaling_leaves_argmin(self):
        """Test scaled weights leave the unpenalized logistic fit in place."""
        labels = _classification()
        w = _weights(labels.n)
        base = solve_inner(_problem(labels, ConvexKind.BINOMIAL, w, tol=1e-12))
        scaled = solve_inner(_problem(labels, ConvexKind.BINOMIAL, 3.0 * w, tol=1e-12))
        np.testing.assert_allclose(scaled.beta, base.beta, atol=1e-6)

    def test_objective_not_above_warm_start(self):
        """Test IRLS never returns a worse objective than its start."""
        labels = _classification()
        problem = _problem(labels, ConvexKind.BINOMIAL, _weights(labels.n))
        result = solve_weighted_glm(problem)
        assert result.objective <= weighted_objective(problem, problem.warm_start)

    def test_rejects_other_components(self):
        """Test the GLM solver refuses non-GLM components."""
        with pytest.raises(ValidationError):
            solve_weighted_glm(_problem(_regression(), ConvexKind.GAUSSIAN))


class TestPiecewiseSolver:
    """Test the subgradient solver and its LP polish."""

    def test_lp_applicable(self):
        """Test which penalties keep the problem linear."""
        assert lp_applicable(PenaltySpec())
        assert lp_applicable(PenaltySpec(PenaltyFamily.LASSO, lam=0.1))
        assert not lp_applicable(PenaltySpec(PenaltyFamily.LASSO, lam=0.1, alpha=0.5))
        assert not lp_applicable(PenaltySpec(PenaltyFamily.SCAD, lam=0.1))

    def test_hinge_lp_is_optimal(self):
        """Test no perturbation of the LP solution lowers the hinge objective."""
        data = _classification()
        problem = _problem(data, ConvexKind.HINGE, _weights(data.n), PenaltySpec(lam=0.02))
        beta = solve_piecewise_lp(problem)
        assert beta is not None
        best = weighted_objective(problem, beta)
        rng = np.random.default_rng(7)
        for _ in range(200):
            step = rng.normal(scale=0.05, size=data.q)
            assert weighted_objective(problem, beta + step) >= best - 1e-9

    def test_polish_is_used_when_applicable(self):
        """Test the dispatcher returns the LP answer for LASSO penalties."""
        data = _classification()
        problem = _problem(data, ConvexKind.HINGE)
        result = solve_inner(problem)
        assert result.method == "linprog"
        assert result.converged
        lp_beta = solve_piecewise_lp(problem)
        assert result.objective == pytest.approx(weighted_objective(problem, lp_beta))

    def test_subgradient_approaches_lp(self):
        """Test the subgradient solver alone gets close to the LP optimum."""
        data = _classification()
        settings = InnerSettings(lp_polish=False)
        problem = _problem(data, ConvexKind.HINGE, settings=settings)
        result = solve_weighted_piecewise(problem)
        assert result.method == "subgradient"
        optimum = weighted_objective(problem, solve_piecewise_lp(problem))
        assert result.objective >= optimum - 1e-9
        assert result.objective <= optimum + 0.25 * (1 + optimum)
        assert result.objective <= weighted_objective(problem, problem.warm_start)

    def test_eps_insensitive_with_scad(self):
        """Test the tube loss with SCAD stays on the subgradient path."""
        data = _regression()
        problem = _problem(
            data,
            ConvexSpec(ConvexKind.EPS_INSENSITIVE, epsilon=0.2),
            penalty=PenaltySpec(PenaltyFamily.SCAD, lam=0.05),
        )
        result = solve_inner(problem)
        assert result.method == "subgradient"
        assert result.objective < weighted_objective(problem, problem.warm_start)

    def test_eps_insensitive_lp(self):
        """Test the tube loss LP is at least as good as the subgradient answer."""
        data = _regression()
        problem = _problem(
            data, ConvexSpec(ConvexKind.EPS_INSENSITIVE, epsilon=0.2), _weights(data.n)
        )
        lp_beta = solve_piecewise_lp(problem)
        sub = solve_weighted_piecewise(
            _problem(
                data,
                ConvexSpec(ConvexKind.EPS_INSENSITIVE, epsilon=0.2),
                _weights(data.n),
                settings=InnerSettings(lp_polish=False),
            )
        )
        assert weighted_objective(problem, lp_beta) <= sub.objective + 1e-9

    def test_optimal_warm_start_is_returned(self):
        """Test a hinge warm start with every margin >= 1 comes back unchanged."""
        rng = np.random.default_rng(15)
        y = np.where(rng.uniform(size=40) < 0.5, -1.0, 1.0)
        P = np.column_stack([y * rng.uniform(0.01, 1.0, size=40), rng.normal(size=40)])
        data = Dataset.from_predictors(P, y, TaskKind.CLASSIFICATION)
        start = np.array([0.0, 1000.0, 0.0])
        problem = _problem(data, ConvexKind.HINGE, warm_start=start)
        assert np.all(y * (data.X @ start) >= 1.0)
        result = solve_inner(problem)
        np.testing.assert_array_equal(result.beta, start)
        assert result.objective == 0.0
        assert result.method == "subgradient"
        assert result.converged

    def test_hinge_matches_grid_oracle(self):
        """Test the n = 10 hinge fit is within 1e-3 of a dense grid search."""
        rng = np.random.default_rng(16)
        x = rng.uniform(-1.0, 1.0, size=10)
        y = np.where(x > 0.2, 1.0, -1.0)
        y[[1, 4, 7]] *= -1
        data = Dataset.from_predictors(x, y, TaskKind.CLASSIFICATION)
        result = solve_inner(_problem(data, ConvexKind.HINGE))

        offsets = np.linspace(-0.5, 0.5, 1001)
        b1_grid = result.beta[1] + offsets
        grid_best = np.inf
        for b0 in result.beta[0] + offsets:
            f = b0 + np.outer(b1_grid, x)
            values = np.maximum(0.0, 1 - y * f).mean(axis=1)
            grid_best = min(grid_best, float(values.min()))
        assert result.objective <= grid_best + 1e-6
        assert abs(result.objective - grid_best) <= 1e-3

    def test_eps_insensitive_constant_response(self):
        """Test an intercept-only tube fit of a constant response lands inside the tube."""
        data = Dataset(np.ones((20, 1)), np.full(20, 5.0), TaskKind.REGRESSION)
        problem = _problem(data, ConvexSpec(ConvexKind.EPS_INSENSITIVE, epsilon=0.1))
        result = solve_inner(problem)
        assert 4.9 <= result.beta[0] <= 5.1
        assert result.objective == pytest.approx(0.0, abs=1e-12)

    def test_rejects_other_components(self):
        """Test the piecewise solver refuses smooth components."""
        with pytest.raises(ValidationError):
            solve_weighted_piecewise(_problem(_regression(), ConvexKind.GAUSSIAN))
