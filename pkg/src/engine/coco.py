"""
Outer reweighting loops for composite losses.

Each outer iteration computes margins u_i and convex values z_i = s(u_i) at
the current coefficients, turns them into dual weights v_i <= 0 and solves
the weighted inner problem with weights -v_i, warm-started at the current
coefficients.

- coco: v_i is the subgradient of -g at z_i (majorize-minimize descent)
- cocots: v_i = -1 when z_i <= sigma, else 0
- cocotv: v_i = -1 for the h smallest z_i (ties to the lower index), else 0
"""

import logging
import math
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from src.engine.standardize import Standardizer
from src.exceptions import (
    ConvergenceError,
    DegenerateProblemError,
    ValidationError,
)
from src.losses.composite import convex_values, linear_predictor, margins, response_for
from src.losses.concave import ecave_slope, eval_concave, gcave_slope, neg_subgradient
from src.losses.convex import convex_derivative
from src.models import (
    Algorithm,
    CompositeLoss,
    ConcaveKind,
    ConcaveSpec,
    ConvexKind,
    Dataset,
    FitConfig,
    FitResult,
    InitKind,
    InnerProblem,
    PenaltySpec,
    TaskKind,
    check_compatible,
)
from src.solvers.inner import margin_map, solve_inner
from src.solvers.penalty import eval_penalty

logger = logging.getLogger(__name__)

MIN_ALPHA_FOR_LAMBDA_MAX = 1e-3


def composite_values(beta, data: Dataset, loss: CompositeLoss) -> Tuple[np.ndarray, np.ndarray]:
    """
    Margins and convex values at beta.

    Returns:
        Tuple of (u, z)
    """
    u = margins(beta, data)
    return u, convex_values(u, data, loss.convex)


def objective(beta, data: Dataset, loss: CompositeLoss, penalty: PenaltySpec) -> float:
    """
    Penalized composite objective F(beta) = (1/n) sum_i g(s(u_i)) + Lambda(beta).

    Args:
        beta: Coefficient vector
        data: Dataset
        loss: Composite loss
        penalty: Penalty specification

    Returns:
        Objective value
    """
    _, z = composite_values(beta, data, loss)
    value = float(np.mean(eval_concave(loss.concave, z)))
    return value + eval_penalty(penalty, beta, data.intercept)


def trimmed_set(z: np.ndarray, h: int) -> np.ndarray:
    """Indices of the h smallest z, ties broken by the lower index."""
    order = np.argsort(z, kind="stable")
    return np.sort(order[:h])


def trimmed_objective(
    beta, data: Dataset, loss: CompositeLoss, penalty: PenaltySpec, h: int
) -> float:
    """(1/n) sum over the h smallest z_i plus Lambda(beta)."""
    _, z = composite_values(beta, data, loss)
    kept = np.sort(z)[:h]
    return float(kept.sum()) / data.n + eval_penalty(penalty, beta, data.intercept)


def threshold_loss(loss: CompositeLoss) -> CompositeLoss:
    """The tcave composite whose objective cocots decreases."""
    return CompositeLoss(ConcaveSpec(ConcaveKind.TCAVE, loss.concave.sigma), loss.convex)


def dual_weights(
    z,
    loss: CompositeLoss,
    algorithm: Algorithm = Algorithm.COCO,
    trim_h: Optional[int] = None,
) -> np.ndarray:
    """
    Dual weights v_i <= 0 for the given convex values.

    Args:
        z: Convex values s(u_i)
        loss: Composite loss (its sigma is the cocots threshold)
        algorithm: Weight rule
        trim_h: Number of kept observations for cocotv

    Returns:
        Vector v with entries in [-w_max, 0]
    """
    z = np.asarray(z, dtype=float)
    if algorithm is Algorithm.COCO:
        return np.asarray(neg_subgradient(loss.concave, z), dtype=float).reshape(z.shape)
    if algorithm is Algorithm.COCOTS:
        return np.where(z <= loss.concave.sigma, -1.0, 0.0)
    if trim_h is None:
        raise ValidationError("cocotv weights require trim_h")
    v = np.zeros_like(z)
    v[trimmed_set(z, trim_h)] = -1.0
    return v


def irwls_weights(loss: CompositeLoss, u):
    """
    Classical M-estimation weight Gamma'(u)/u, with Gamma''(0) at u = 0.

    Only defined for the gaussian convex component. The influence functions
    are written directly in the residual u.

    Args:
        loss: Composite loss with convex kind gaussian
        u: Residual(s)

    Returns:
        Weight(s) with the shape of u
    """
    if loss.convex.kind is not ConvexKind.GAUSSIAN:
        raise ValidationError("irwls_weights is defined for the gaussian convex component only")
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    g = loss.concave
    sigma = g.sigma
    a = np.abs(u)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if g.kind is ConcaveKind.HCAVE:
            psi = np.where(a <= sigma, u, sigma * np.sign(u))
            origin = 1.0
        elif g.kind is ConcaveKind.ACAVE:
            psi = np.where(a <= sigma * math.pi, sigma * np.sin(u / sigma), 0.0)
            origin = 1.0
        elif g.kind is ConcaveKind.BCAVE:
            psi = np.where(a <= sigma, u * (1 - (u / sigma) ** 2) ** 2, 0.0)
            origin = 1.0
        elif g.kind is ConcaveKind.CCAVE:
            psi = u * np.exp(-(u**2) / (2 * sigma**2))
            origin = 1.0
        elif g.kind is ConcaveKind.DCAVE:
            psi = u / ((1 + u**2 / 2) * (1 + u**2 * math.exp(-sigma) / 2))
            origin = 1.0
        elif g.kind is ConcaveKind.ECAVE:
            slope = ecave_slope(sigma, g.delta)
            tail = np.sign(u) * 2 * math.sqrt(2) * np.exp(-(u**2) / (2 * sigma)) / math.sqrt(
                math.pi * sigma
            )
            psi = np.where(u**2 / 2 <= g.delta, slope * u, tail)
            origin = slope
        elif g.kind is ConcaveKind.GCAVE:
            slope = gcave_slope(sigma, g.delta)
            half = u**2 / 2
            tail = u * half ** (sigma - 1) / (1 + half) ** (sigma + 1)
            psi = np.where(half <= g.delta, slope * u, tail)
            origin = slope
        else:
            psi = np.where(u**2 / 2 <= sigma, u, 0.0)
            origin = 1.0

        weights = np.where(u == 0, origin, psi / np.where(u == 0, 1.0, u))

    return float(weights[0]) if scalar else weights


def _default_init(penalty: PenaltySpec) -> InitKind:
    return InitKind.LEAST_SQUARES if penalty.is_zero else InitKind.ZEROS


def _uses_standardization(config: FitConfig, penalty: PenaltySpec) -> bool:
    return (not penalty.is_zero) if config.standardize is None else bool(config.standardize)


def _check_inputs(data: Dataset, loss: CompositeLoss, config: FitConfig) -> None:
    check_compatible(data, loss.convex)
    if data.n < 2:
        raise DegenerateProblemError(f"cannot fit with n = {data.n} observation(s)")
    if config.algorithm is Algorithm.COCOTV and config.trim_h > data.n:
        raise ValidationError(f"trim_h = {config.trim_h} exceeds n = {data.n}")


def _least_squares_start(
    data: Dataset, loss: CompositeLoss, penalty: PenaltySpec, config: FitConfig
) -> np.ndarray:
    """Unweighted, unpenalized inner fit from zero."""
    problem = InnerProblem(
        data=data,
        weights=np.ones(data.n),
        convex=loss.convex,
        penalty=replace(penalty, lam=0.0),
        warm_start=np.zeros(data.q),
        settings=config.inner,
    )
    return solve_inner(problem).beta


def _trimmed_start(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: FitConfig,
    scaling: Standardizer,
) -> np.ndarray:
    """
    Concentration-step start from random elemental subsets.

    Each subset of q rows is fitted, refined by two C-steps with
    h = (n + p + 1) // 2, and the best n_keep candidates are iterated to
    convergence; the smallest trimmed objective wins.
    """
    n, q = data.n, data.q
    h = min(n, (n + data.p + 1) // 2)
    rng = np.random.default_rng(config.seed)
    size = min(q, n)
    trim_config = replace(config, algorithm=Algorithm.COCOTV, trim_h=h, record_path=False)

    def c_step(beta: np.ndarray, rows: np.ndarray) -> np.ndarray:
        weights = np.zeros(n)
        weights[rows] = 1.0
        problem = InnerProblem(
            data=data,
            weights=weights,
            convex=loss.convex,
            penalty=penalty,
            warm_start=beta,
            settings=config.inner,
            penalty_scale=_divisor(scaling),
        )
        return solve_inner(problem).beta

    candidates: List[Tuple[float, np.ndarray]] = []
    for _ in range(config.n_starts):
        rows = rng.choice(n, size=size, replace=False)
        try:
            beta = c_step(np.zeros(q), rows)
            for _ in range(2):
                _, z = composite_values(beta, data, loss)
                beta = c_step(beta, trimmed_set(z, h))
        except (DegenerateProblemError, ConvergenceError) as exc:
            logger.debug("trimmed start skipped a subset: %s", exc)
            continue
        value = _objective_for(beta, data, loss, penalty, trim_config, scaling)
        candidates.append((value, beta))

    if not candidates:
        logger.warning("no elemental subset could be fitted; starting from zeros")
        return np.zeros(q)

    candidates.sort(key=lambda item: item[0])
    best_value, best_beta = math.inf, candidates[0][1]
    for _, beta in candidates[: config.n_keep]:
        try:
            refined = _run_outer(data, loss, penalty, trim_config, beta, scaling)
        except (DegenerateProblemError, ConvergenceError) as exc:
            logger.debug("trimmed start refinement failed: %s", exc)
            continue
        if refined.objective < best_value:
            best_value, best_beta = refined.objective, scaling.to_internal(refined.beta)
    return best_beta


def _initial_beta(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: FitConfig,
    scaling: Standardizer,
) -> np.ndarray:
    init = config.init or _default_init(penalty)
    if init is InitKind.ZEROS:
        return np.zeros(data.q)
    if init is InitKind.USER:
        start = np.asarray(config.init_beta, dtype=float)
        if start.shape != (data.q,):
            raise ValidationError(
                f"init_beta must have length {data.q}, got shape {start.shape}"
            )
        return scaling.to_internal(start)
    if init is InitKind.LEAST_SQUARES:
        return _least_squares_start(data, loss, penalty, config)
    return _trimmed_start(data, loss, penalty, config, scaling)


def _divisor(scaling: Standardizer) -> Optional[np.ndarray]:
    return None if scaling.is_identity else scaling.scale


def _objective_for(
    beta,
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: FitConfig,
    scaling: Optional[Standardizer] = None,
) -> float:
    """The objective the algorithm decreases, on the original predictor scale."""
    if scaling is not None and not scaling.is_identity:
        beta, data = scaling.to_original(beta), scaling.restore(data)
    if config.algorithm is Algorithm.COCOTV:
        return trimmed_objective(beta, data, loss, penalty, config.trim_h)
    if config.algorithm is Algorithm.COCOTS:
        return objective(beta, data, threshold_loss(loss), penalty)
    return objective(beta, data, loss, penalty)


def _run_outer(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: FitConfig,
    beta: np.ndarray,
    scaling: Optional[Standardizer] = None,
) -> FitResult:
    """
    Iterate weight updates and inner solves on an already prepared dataset.

    With a scaling, data and beta live in its internal system while the penalty
    and the objective trace stay on the original predictor scale.
    """
    scaling = scaling or Standardizer.identity(data)
    beta = np.array(beta, dtype=float)
    u, z = composite_values(beta, data, loss)
    current = _objective_for(beta, data, loss, penalty, config, scaling)
    trace = [current]
    path = [beta.copy()] if config.record_path else None
    inner_warnings: List[int] = []
    converged = False
    k = 0

    for k in range(1, config.max_outer + 1):
        v = dual_weights(z, loss, config.algorithm, config.trim_h)
        weights = -v
        if not np.any(weights > 0):
            raise DegenerateProblemError("every observation received weight zero", iteration=k)

        problem = InnerProblem(
            data=data,
            weights=weights,
            convex=loss.convex,
            penalty=penalty,
            warm_start=beta,
            settings=config.inner,
            penalty_scale=_divisor(scaling),
        )
        try:
            result = solve_inner(problem)
        except DegenerateProblemError as exc:
            raise DegenerateProblemError(str(exc), iteration=k) from exc
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"inner solver failed at outer iteration {k}: {exc}", trace=trace
            ) from exc
        if not result.converged:
            inner_warnings.append(k)

        beta = result.beta
        u, z = composite_values(beta, data, loss)
        previous, current = current, _objective_for(beta, data, loss, penalty, config, scaling)
        trace.append(current)
        if path is not None:
            path.append(beta.copy())
        logger.debug("outer iteration %d: objective %.12g", k, current)

        if abs(previous - current) / (1 + abs(previous)) < config.outer_tol:
            converged = True
            break

    return FitResult(
        beta=scaling.to_original(beta),
        dual_v=dual_weights(z, loss, config.algorithm, config.trim_h) + 0.0,
        objective_trace=trace,
        outer_iters=k,
        converged=converged,
        z=z,
        u=u,
        algorithm=config.algorithm,
        lam=penalty.lam,
        inner_warnings=inner_warnings,
        beta_path=[scaling.to_original(b) for b in path] if path is not None else None,
    )


def fit(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: Optional[FitConfig] = None,
) -> FitResult:
    """
    Fit a penalized composite-loss model.

    Args:
        data: Dataset
        loss: Composite loss; its convex component must suit the task
        penalty: Penalty specification
        config: Outer-loop configuration (defaults to plain coco)

    Returns:
        FitResult with coefficients on the original predictor scale

    Raises:
        ValidationError: If loss, data and configuration do not fit together
        DegenerateProblemError: If n < 2 or all weights vanish at some iteration
        ConvergenceError: If an inner solver fails
    """
    config = config or FitConfig()
    _check_inputs(data, loss, config)

    if _uses_standardization(config, penalty):
        scaling = Standardizer.fit(data)
    else:
        scaling = Standardizer.identity(data)
    internal = scaling.transform(data)
    beta0 = _initial_beta(internal, loss, penalty, config, scaling)

    result = _run_outer(internal, loss, penalty, config, beta0, scaling)
    if result.converged:
        logger.info(
            "%s converged after %d outer iterations (objective %.8g)",
            config.algorithm.value,
            result.outer_iters,
            result.objective,
        )
    else:
        logger.warning(
            "%s stopped at max_outer = %d without meeting outer_tol",
            config.algorithm.value,
            config.max_outer,
        )
    return result


def fit_multistart(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: Optional[FitConfig] = None,
    inits: Sequence[InitKind] = (InitKind.LEAST_SQUARES, InitKind.TRIMMED),
) -> FitResult:
    """
    Run fit from several starting points and keep the smallest objective.

    Args:
        data: Dataset
        loss: Composite loss
        penalty: Penalty specification
        config: Base configuration; its init is replaced per start
        inits: Starting-point kinds to try

    Returns:
        The FitResult with the lowest objective on the original scale
    """
    config = config or FitConfig()
    if not inits:
        raise ValidationError("fit_multistart needs at least one init")
    best: Optional[FitResult] = None
    best_value = math.inf
    errors: List[Exception] = []
    for init in inits:
        try:
            result = fit(data, loss, penalty, replace(config, init=init))
        except (DegenerateProblemError, ConvergenceError) as exc:
            errors.append(exc)
            continue
        value = _objective_for(result.beta, data, loss, penalty, config)
        logger.debug("start %s reached objective %.10g", InitKind(init).value, value)
        if value < best_value:
            best, best_value = result, value
    if best is None:
        raise errors[-1]
    return best


def lambda_max(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: Optional[FitConfig] = None,
) -> float:
    """
    Smallest lambda at which all slopes stay at zero under LASSO.

    An intercept-only fit supplies the weights; lambda_max is the largest
    absolute weighted loss gradient over the slopes divided by alpha. The
    penalty is charged on original-scale coefficients, so standardization
    does not enter.

    Returns:
        lambda_max (0.0 when no slope has a gradient)
    """
    config = config or FitConfig()
    _check_inputs(data, loss, config)

    beta = np.zeros(data.q)
    if data.intercept:
        column = Dataset(
            X=data.X[:, :1],
            y=data.y,
            task=data.task,
            intercept=True,
        )
        start_config = replace(
            config, init=InitKind.LEAST_SQUARES, record_path=False, standardize=False
        )
        beta[0] = fit(column, loss, replace(penalty, lam=0.0), start_config).beta[0]

    _, z = composite_values(beta, data, loss)
    weights = -dual_weights(z, loss, config.algorithm, config.trim_h)
    problem = InnerProblem(
        data=data,
        weights=weights,
        convex=loss.convex,
        penalty=penalty,
        warm_start=beta,
        settings=config.inner,
    )
    offset, slope = margin_map(problem)
    u = offset + slope * (data.X @ beta)
    ds = np.asarray(convex_derivative(loss.convex, u, response_for(data)), dtype=float)
    grad = data.X.T @ (weights * ds * slope) / data.n
    slopes = data.slope_index
    if len(slopes) == 0:
        return 0.0
    return float(np.max(np.abs(grad[slopes]))) / max(penalty.alpha, MIN_ALPHA_FOR_LAMBDA_MAX)


def lambda_grid(lmax: float, n_lambda: int = 50, ratio: float = 1e-4) -> np.ndarray:
    """
    Descending log-spaced grid from lmax to ratio * lmax.

    Raises:
        ValidationError: If lmax is not positive or the grid size is invalid
    """
    if not lmax > 0:
        raise ValidationError(f"lambda_max must be > 0 to build a grid, got {lmax}")
    if n_lambda < 1 or not 0 < ratio < 1:
        raise ValidationError("n_lambda must be >= 1 and ratio in (0, 1)")
    if n_lambda == 1:
        return np.array([lmax])
    return np.geomspace(lmax, lmax * ratio, n_lambda)


def fit_path(
    data: Dataset,
    loss: CompositeLoss,
    penalty: PenaltySpec,
    config: Optional[FitConfig] = None,
    lambdas: Optional[Sequence[float]] = None,
) -> List[FitResult]:
    """
    Fit along a sequence of lambda values, warm-starting each fit at the previous one.

    Args:
        data: Dataset
        loss: Composite loss
        penalty: Penalty template (its lambda is replaced along the path)
        config: Base configuration, used as-is for the first lambda
        lambdas: Penalty levels (default: the 50-point grid from lambda_max)

    Returns:
        One FitResult per lambda, in the given order
    """
    config = config or FitConfig()
    if lambdas is None:
        lambdas = lambda_grid(lambda_max(data, loss, penalty, config))
    if config.standardize is None:
        # one coordinate system along the whole path
        config = replace(config, standardize=True)

    results: List[FitResult] = []
    current = config
    for lam in lambdas:
        result = fit(data, loss, replace(penalty, lam=float(lam)), current)
        results.append(result)
        current = replace(config, init=InitKind.USER, init_beta=tuple(result.beta))
    return results


def predict(beta, data: Dataset) -> np.ndarray:
    """
    Task-appropriate predictions.

    Regression returns f, classification sign(f) with sign(0) = +1,
    binomial expit(f) and poisson exp(f).
    """
    f = linear_predictor(beta, data)
    if data.task is TaskKind.CLASSIFICATION:
        return np.where(f >= 0, 1.0, -1.0)
    if data.task is TaskKind.BINOMIAL:
        return expit(f)
    if data.task is TaskKind.POISSON:
        return np.exp(f)
    return f
