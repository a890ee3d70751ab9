"""
Weighted inner solvers.

Each solver minimizes (1/n) sum_i w_i s(u_i(beta)) + Lambda(beta) for fixed
nonnegative weights w_i and returns an InnerResult:

- quadratic components (gaussian, gaussianC): cyclic coordinate descent, or
  a direct least-squares solve when the penalty vanishes
- exponential-family components (binomial, poisson): penalized IRLS with
  step-halving
- piecewise-linear components (hinge, epsInsensitive): proximal subgradient
  descent with iterate averaging, optionally polished by an exact LP
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.special import expit

from src.exceptions import ConvergenceError, DegenerateProblemError, ValidationError
from src.losses.composite import margins, response_for
from src.losses.convex import convex_derivative, eval_convex
from src.models import (
    ConvexKind,
    InnerProblem,
    InnerResult,
    PenaltyFamily,
    PenaltySpec,
    TaskKind,
)
from src.solvers.penalty import eval_penalty, soft_threshold, sparsity_derivative, threshold

logger = logging.getLogger(__name__)

QUADRATIC = (ConvexKind.GAUSSIAN, ConvexKind.GAUSSIAN_C)
GLM = (ConvexKind.BINOMIAL, ConvexKind.POISSON)
PIECEWISE = (ConvexKind.HINGE, ConvexKind.EPS_INSENSITIVE)

_VARIANCE_FLOOR = 1e-10
_CHECK_EVERY = 100


def weighted_objective(problem: InnerProblem, beta) -> float:
    """
    Evaluate (1/n) sum_i w_i s(u_i(beta)) + Lambda(beta).

    Args:
        problem: Inner problem
        beta: Coefficient vector

    Returns:
        Objective value
    """
    data = problem.data
    u = margins(beta, data)
    s = np.asarray(eval_convex(problem.convex, u, response_for(data)), dtype=float)
    loss = float(np.dot(problem.weights, s)) / data.n
    charged = np.asarray(beta, dtype=float) / penalty_scale(problem)
    return loss + eval_penalty(problem.penalty, charged, data.intercept)


def penalty_scale(problem: InnerProblem) -> np.ndarray:
    """Per-column divisors of the penalized coefficients (ones when unset)."""
    if problem.penalty_scale is None:
        return np.ones(problem.data.q)
    return problem.penalty_scale


def margin_map(problem: InnerProblem) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients (a, b) with u_i = a_i + b_i f_i for the problem's task.

    Returns:
        Tuple of offset and slope vectors
    """
    data = problem.data
    task = data.task
    if task is TaskKind.REGRESSION:
        return data.y.copy(), -np.ones(data.n)
    if task is TaskKind.CLASSIFICATION:
        return np.zeros(data.n), data.y.copy()
    return np.zeros(data.n), np.ones(data.n)


def solve_inner(problem: InnerProblem) -> InnerResult:
    """
    Dispatch to the solver for the problem's convex component.

    Args:
        problem: Inner problem

    Returns:
        InnerResult
    """
    kind = problem.convex.kind
    if kind in QUADRATIC:
        return solve_weighted_gaussian(problem)
    if kind in GLM:
        return solve_weighted_glm(problem)
    return solve_weighted_piecewise(problem)


def _check_weights(weights: np.ndarray) -> None:
    if not np.any(weights > 0):
        raise DegenerateProblemError("all observation weights are zero")


def weighted_least_squares(
    X: np.ndarray,
    target: np.ndarray,
    weights: np.ndarray,
    penalty: PenaltySpec,
    beta: np.ndarray,
    intercept: bool,
    tol: float,
    max_iter: int,
    scale: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int, bool]:
    """
    Minimize (1/2n) sum_i w_i (target_i - x_i beta)^2 + Lambda(beta).

    Unpenalized problems are solved directly with a weighted np.linalg.lstsq
    call (minimum-norm solution when the weighted design is rank deficient;
    the starting vector, tol and max_iter are unused and one sweep is
    reported). Otherwise cyclic coordinate descent alternates full sweeps
    with sweeps over the active set.

    Args:
        X: Design matrix
        target: Working response
        weights: Nonnegative weights
        penalty: Penalty specification
        beta: Starting vector (not modified)
        intercept: Whether column 0 is an unpenalized intercept
        tol: Stop when the largest coordinate change is below tol
        max_iter: Maximum number of sweeps
        scale: Column divisors; the penalty is charged on beta_j / scale_j

    Returns:
        Tuple of (beta, sweeps, converged)
    """
    _check_weights(weights)
    n, q = X.shape

    if penalty.is_zero:
        root = np.sqrt(weights)
        solution, *_ = np.linalg.lstsq(X * root[:, None], target * root, rcond=None)
        return solution, 1, True

    beta = np.array(beta, dtype=float)
    resid = target - X @ beta
    wx = X * (weights / n)[:, None]
    curvature = np.einsum("ij,ij->j", wx, X)
    weight_total = float(weights.sum())
    first = 1 if intercept else 0
    scale = np.ones(q) if scale is None else np.asarray(scale, dtype=float)

    def sweep(coords) -> float:
        largest = 0.0
        for j in coords:
            old = beta[j]
            if j == 0 and intercept:
                shift = float(np.dot(weights, resid)) / weight_total
                new = old + shift
            elif curvature[j] <= 0:
                new = 0.0
            else:
                z = float(np.dot(wx[:, j], resid)) + curvature[j] * old
                # exact minimizer in the charged coordinate b = beta_j / s
                s = scale[j]
                new = s * threshold(penalty, z * s, curvature[j] * s * s)
            if new != old:
                np.subtract(resid, X[:, j] * (new - old), out=resid)
                beta[j] = new
                largest = max(largest, abs(new - old))
        return largest

    all_coords = range(q)
    sweeps = 0
    while sweeps < max_iter:
        sweeps += 1
        if sweep(all_coords) < tol:
            return beta, sweeps, True
        active = [j for j in range(q) if j < first or beta[j] != 0.0]
        while sweeps < max_iter:
            sweeps += 1
            if sweep(active) < tol:
                break
    logger.debug("coordinate descent stopped at the sweep cap (%d)", max_iter)
    return beta, sweeps, False


def solve_weighted_gaussian(problem: InnerProblem) -> InnerResult:
    """
    Weighted penalized least squares for gaussian and gaussianC components.

    Both components reduce to least squares on the response: the residual
    for regression, and the +/-1 label for classification.

    Args:
        problem: Inner problem with a quadratic convex component

    Returns:
        InnerResult

    Raises:
        ValidationError: If the convex component is not quadratic
        DegenerateProblemError: If every weight is zero
    """
    if problem.convex.kind not in QUADRATIC:
        raise ValidationError(f"solve_weighted_gaussian cannot handle {problem.convex.kind.value}")
    settings = problem.settings
    tol = problem.tol or settings.gaussian_tol
    max_iter = problem.max_iter or settings.gaussian_max_iter
    data = problem.data

    beta, sweeps, converged = weighted_least_squares(
        data.X,
        data.y,
        problem.weights,
        problem.penalty,
        problem.warm_start,
        data.intercept,
        tol,
        max_iter,
        problem.penalty_scale,
    )
    objective = weighted_objective(problem, beta)
    logger.debug("gaussian inner solve: %d sweeps, objective %.10g", sweeps, objective)
    return InnerResult(beta, objective, sweeps, converged, method="coordinate_descent")


def _glm_response(problem: InnerProblem) -> np.ndarray:
    data = problem.data
    if problem.convex.kind is ConvexKind.BINOMIAL and data.task is TaskKind.CLASSIFICATION:
        return (data.y + 1.0) / 2.0
    return data.y


def solve_weighted_glm(problem: InnerProblem) -> InnerResult:
    """
    Weighted penalized IRLS for binomial and poisson components.

    Each step forms the working response f + (y - mu)/var with curvature
    weights w_i var_i and solves the weighted least-squares subproblem.
    A step that raises the objective is halved up to max_halvings times.

    Args:
        problem: Inner problem with an exponential-family component

    Returns:
        InnerResult

    Raises:
        DegenerateProblemError: If every weight is zero
        ConvergenceError: If the objective still rises after all halvings
    """
    if problem.convex.kind not in GLM:
        raise ValidationError(f"solve_weighted_glm cannot handle {problem.convex.kind.value}")
    _check_weights(problem.weights)
    settings = problem.settings
    tol = problem.tol or settings.glm_tol
    max_iter = problem.max_iter or settings.glm_max_iter
    data = problem.data
    y = _glm_response(problem)
    binomial = problem.convex.kind is ConvexKind.BINOMIAL

    beta = problem.warm_start.copy()
    current = weighted_objective(problem, beta)
    trace: List[float] = [current]
    converged = False
    step = 0

    for step in range(1, max_iter + 1):
        f = np.clip(data.X @ beta, -settings.eta_clamp, settings.eta_clamp)
        if binomial:
            mu = expit(f)
            var = mu * (1 - mu)
        else:
            mu = np.exp(f)
            var = mu
        var = np.maximum(var, _VARIANCE_FLOOR)
        working = f + (y - mu) / var
        candidate, _, _ = weighted_least_squares(
            data.X,
            working,
            problem.weights * var,
            problem.penalty,
            beta,
            data.intercept,
            settings.gaussian_tol,
            settings.gaussian_max_iter,
            problem.penalty_scale,
        )

        value = weighted_objective(problem, candidate)
        halvings = 0
        while not value <= current and halvings < settings.max_halvings:
            candidate = beta + 0.5 * (candidate - beta)
            value = weighted_objective(problem, candidate)
            halvings += 1

        if not value <= current:
            # a rise within tolerance means IRLS has stalled at the optimum
            if np.isfinite(value) and value <= current + tol * (1 + abs(current)):
                converged = True
                break
            trace.append(value)
            raise ConvergenceError(
                f"IRLS objective increased after {halvings} step-halvings at step {step}",
                trace=trace,
            )

        change = (current - value) / (1 + abs(current))
        beta, current = candidate, value
        trace.append(current)
        logger.debug("IRLS step %d: objective %.10g (halvings %d)", step, current, halvings)
        if change < tol:
            converged = True
            break

    return InnerResult(beta, current, step, converged, method="irls")


def _subgradient_bound(X: np.ndarray, weights: np.ndarray, slope: np.ndarray) -> float:
    n = X.shape[0]
    per_column = (np.abs(slope) * weights) @ np.abs(X) / n
    return float(np.linalg.norm(per_column))


def _prox(
    beta: np.ndarray,
    step: float,
    penalty: PenaltySpec,
    first: int,
    anchor: np.ndarray,
    divisor: np.ndarray,
) -> None:
    """Apply the proximal map of the sparsity part in place (LLA weights for SCAD)."""
    if penalty.is_zero or penalty.alpha == 0:
        return
    divisor = divisor[first:]
    if penalty.family is PenaltyFamily.SCAD:
        charged = anchor[first:] / divisor
        level = penalty.alpha * np.asarray(sparsity_derivative(penalty, charged)) / divisor
    else:
        level = penalty.alpha * penalty.lam / divisor
    beta[first:] = soft_threshold(beta[first:], step * level)


def solve_weighted_piecewise(problem: InnerProblem) -> InnerResult:
    """
    Proximal subgradient descent for hinge and epsInsensitive components.

    The step size is c/(G sqrt(t)), where G bounds the loss subgradient.
    The running average and the best iterate are both tracked; the best
    objective seen (warm start included) is returned. When the penalty is
    piecewise linear the problem is also solved exactly as an LP, and the
    LP answer replaces the subgradient one only when strictly better.

    Args:
        problem: Inner problem with a piecewise-linear component

    Returns:
        InnerResult; converged is False when the step cap was reached with a
        relative objective change above 100 * tol
    """
    if problem.convex.kind not in PIECEWISE:
        raise ValidationError(
            f"solve_weighted_piecewise cannot handle {problem.convex.kind.value}"
        )
    _check_weights(problem.weights)
    settings = problem.settings
    tol = problem.tol or settings.piecewise_tol
    max_iter = problem.max_iter or settings.piecewise_max_iter
    data = problem.data
    penalty = problem.penalty
    n = data.n
    first = 1 if data.intercept else 0
    ridge = penalty.lam * (1 - penalty.alpha)
    divisor = penalty_scale(problem)
    curvature = ridge / divisor**2
    offset, slope = margin_map(problem)

    bound = _subgradient_bound(data.X, problem.weights, slope) + float(np.max(curvature))
    scale = settings.step_constant / bound if bound > 0 else 0.0

    beta = problem.warm_start.copy()
    best = beta.copy()
    best_value = weighted_objective(problem, best)
    average = beta.copy()
    step_total = 0.0
    checkpoint = best_value
    converged = scale == 0.0
    t = 0

    while not converged and t < max_iter:
        t += 1
        u = offset + slope * (data.X @ beta)
        ds = np.asarray(convex_derivative(problem.convex, u), dtype=float)
        grad = data.X.T @ (problem.weights * ds * slope) / n
        if ridge:
            grad[first:] += curvature[first:] * beta[first:]
        if not np.any(grad) and penalty.is_zero:
            converged = True
            break

        eta = scale / math.sqrt(t)
        anchor = beta.copy()
        beta = beta - eta * grad
        _prox(beta, eta, penalty, first, anchor, divisor)

        step_total += eta
        average += (eta / step_total) * (beta - average)

        if t % _CHECK_EVERY == 0:
            for candidate in (beta, average):
                value = weighted_objective(problem, candidate)
                if value < best_value:
                    best, best_value = candidate.copy(), value
            change = abs(checkpoint - best_value) / (1 + abs(checkpoint))
            logger.debug("subgradient step %d: best objective %.10g", t, best_value)
            if change < tol:
                converged = True
            checkpoint = best_value

    value = weighted_objective(problem, beta)
    if value < best_value:
        best, best_value = beta.copy(), value
    if not converged:
        change = abs(checkpoint - best_value) / (1 + abs(checkpoint))
        converged = change <= 100 * tol
        if not converged:
            logger.warning(
                "piecewise inner solver reached %d steps with relative change %.3g",
                max_iter,
                change,
            )

    method = "subgradient"
    if settings.lp_polish and lp_applicable(penalty):
        polished = solve_piecewise_lp(problem)
        if polished is not None:
            value = weighted_objective(problem, polished)
            if value < best_value:
                best, best_value, method = polished, value, "linprog"
                converged = True

    return InnerResult(best, best_value, t, converged, method=method)


def lp_applicable(penalty: PenaltySpec) -> bool:
    """Whether the penalty keeps the piecewise-linear problem a linear program."""
    return penalty.is_zero or (penalty.family is PenaltyFamily.LASSO and penalty.alpha == 1.0)


def solve_piecewise_lp(problem: InnerProblem) -> Optional[np.ndarray]:
    """
    Solve a hinge or epsInsensitive problem with a LASSO or zero penalty exactly.

    Variables are beta (free), t_j >= |beta_j| for penalized slopes when
    lambda > 0 (each costing lambda / penalty_scale_j), and slacks
    xi_i >= s(u_i) for rows with positive weight.

    Returns:
        The LP solution, or None if HiGHS did not report an optimum
    """
    data = problem.data
    penalty = problem.penalty
    n, q = data.X.shape
    first = 1 if data.intercept else 0
    keep = problem.weights > 0
    X = data.X[keep]
    w = problem.weights[keep]
    offset, slope = margin_map(problem)
    offset, slope = offset[keep], slope[keep]
    m = X.shape[0]
    n_pen = 0 if penalty.is_zero else q - first

    # u_i = offset_i + slope_i * x_i beta
    M = X * slope[:, None]
    charge = penalty.lam / penalty_scale(problem)[first:] if n_pen else np.zeros(0)
    cost = np.concatenate([np.zeros(q), charge, w / n])
    rows, rhs = [], []
    eye = np.eye(m)
    if problem.convex.kind is ConvexKind.HINGE:
        # xi >= 1 - u
        rows.append(np.hstack([-M, np.zeros((m, n_pen)), -eye]))
        rhs.append(offset - 1.0)
    else:
        eps = problem.convex.epsilon
        # xi >= u - eps and xi >= -u - eps
        rows.append(np.hstack([M, np.zeros((m, n_pen)), -eye]))
        rhs.append(eps - offset)
        rows.append(np.hstack([-M, np.zeros((m, n_pen)), -eye]))
        rhs.append(eps + offset)
    if n_pen:
        select = np.zeros((n_pen, q))
        select[:, first:] = np.eye(n_pen)
        rows.append(np.hstack([select, -np.eye(n_pen), np.zeros((n_pen, m))]))
        rows.append(np.hstack([-select, -np.eye(n_pen), np.zeros((n_pen, m))]))
        rhs.extend([np.zeros(n_pen), np.zeros(n_pen)])

    bounds = [(None, None)] * q + [(0, None)] * (n_pen + m)
    result = linprog(
        cost,
        A_ub=np.vstack(rows),
        b_ub=np.concatenate(rhs),
        bounds=bounds,
        method="highs",
    )
    if result.status != 0:
        logger.debug("LP polish skipped: %s", result.message)
        return None
    return np.asarray(result.x[:q], dtype=float)
