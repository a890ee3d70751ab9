"""
Data models for the CC-estimation library.

This module defines the core data structures used throughout the application:
loss and penalty specifications, datasets, solver configuration and results.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.exceptions import ValidationError


class ConcaveKind(Enum):
    """Enumeration of concave components g."""

    HCAVE = "hcave"
    ACAVE = "acave"
    BCAVE = "bcave"
    CCAVE = "ccave"
    DCAVE = "dcave"
    ECAVE = "ecave"
    GCAVE = "gcave"
    TCAVE = "tcave"


class ConvexKind(Enum):
    """Enumeration of convex components s."""

    GAUSSIAN = "gaussian"
    GAUSSIAN_C = "gaussianC"
    BINOMIAL = "binomial"
    POISSON = "poisson"
    HINGE = "hinge"
    EPS_INSENSITIVE = "epsInsensitive"


class TaskKind(Enum):
    """How the margin u_i is formed from y_i and the linear predictor f_i."""

    REGRESSION = "regression"
    CLASSIFICATION = "classification"
    BINOMIAL = "binomial"
    POISSON = "poisson"


class PenaltyFamily(Enum):
    """Sparsity penalty families."""

    LASSO = "lasso"
    SCAD = "scad"


class Algorithm(Enum):
    """Outer loops: reweighting by subgradient, by threshold, or by count."""

    COCO = "coco"
    COCOTS = "cocots"
    COCOTV = "cocotv"


class InitKind(Enum):
    """Starting point of the outer loop."""

    ZEROS = "zeros"
    LEAST_SQUARES = "leastSquaresFit"
    USER = "userVector"
    TRIMMED = "trimmedStart"


class Contamination(Enum):
    """Training-data contamination schemes of the regression scenarios."""

    NONE = "none"
    VERTICAL = "vertical"
    VERTICAL_LEVERAGE = "verticalLeverage"


class Example(Enum):
    """Simulation designs."""

    EX1 = "ex1"
    EX2 = "ex2"
    EX3 = "ex3"


# Convex components allowed for each task
TASK_CONVEX: Dict[TaskKind, frozenset] = {
    TaskKind.REGRESSION: frozenset({ConvexKind.GAUSSIAN, ConvexKind.EPS_INSENSITIVE}),
    TaskKind.CLASSIFICATION: frozenset(
        {ConvexKind.GAUSSIAN_C, ConvexKind.BINOMIAL, ConvexKind.HINGE}
    ),
    TaskKind.BINOMIAL: frozenset({ConvexKind.BINOMIAL}),
    TaskKind.POISSON: frozenset({ConvexKind.POISSON}),
}

GCAVE_SMALL_SIGMA_DELTA = 1e-4
ECAVE_DELTA_RATIO = 0.25


def coerce_enum(enum_cls, value):
    """Accept either an enum member or its string value."""
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        valid = [m.value for m in enum_cls]
        raise ValidationError(
            f"Invalid {enum_cls.__name__}: {value!r}. Must be one of {valid}"
        ) from None


@dataclass(frozen=True)
class ConcaveSpec:
    """
    A concave component g with its shape parameters.

    Attributes:
        kind: Which concave component
        sigma: Shape parameter (> 0; tcave admits 0 and +inf)
        delta: Linear-cap width for ecave and gcave (filled with the default
            when omitted; must be absent for other kinds)
    """

    kind: ConcaveKind
    sigma: float
    delta: Optional[float] = None

    def __post_init__(self):
        """Validate parameters and fill the default delta."""
        kind = coerce_enum(ConcaveKind, self.kind)
        object.__setattr__(self, "kind", kind)
        sigma = float(self.sigma)
        object.__setattr__(self, "sigma", sigma)

        if math.isnan(sigma):
            raise ValidationError("sigma must be a number")
        if kind is ConcaveKind.TCAVE:
            if sigma < 0:
                raise ValidationError(f"tcave requires sigma >= 0, got {sigma}")
        elif not (0 < sigma < math.inf):
            raise ValidationError(f"{kind.value} requires finite sigma > 0, got {sigma}")

        if kind is ConcaveKind.ECAVE:
            delta = ECAVE_DELTA_RATIO * sigma if self.delta is None else float(self.delta)
            if not delta > 0:
                raise ValidationError(f"ecave requires delta > 0, got {delta}")
            object.__setattr__(self, "delta", delta)
        elif kind is ConcaveKind.GCAVE:
            if sigma >= 1:
                exact = (sigma - 1) / 2
                if self.delta is not None and not math.isclose(float(self.delta), exact):
                    raise ValidationError(
                        f"gcave with sigma >= 1 fixes delta = (sigma - 1)/2 = {exact}, "
                        f"got {self.delta}"
                    )
                object.__setattr__(self, "delta", exact)
            else:
                delta = GCAVE_SMALL_SIGMA_DELTA if self.delta is None else float(self.delta)
                if not delta > 0:
                    raise ValidationError(f"gcave requires delta > 0, got {delta}")
                object.__setattr__(self, "delta", delta)
        elif self.delta is not None:
            raise ValidationError(f"delta is only defined for ecave and gcave, not {kind.value}")

    @property
    def label(self) -> str:
        """Short label such as 'ccave(1.5)'."""
        return f"{self.kind.value}({self.sigma:g})"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a serializable dictionary."""
        return {"kind": self.kind.value, "sigma": self.sigma, "delta": self.delta}


@dataclass(frozen=True)
class ConvexSpec:
    """
    A convex component s.

    Attributes:
        kind: Which convex component
        epsilon: Tube half-width, only for epsInsensitive (default 0.1)
    """

    kind: ConvexKind
    epsilon: Optional[float] = None

    def __post_init__(self):
        """Validate epsilon."""
        kind = coerce_enum(ConvexKind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ConvexKind.EPS_INSENSITIVE:
            eps = 0.1 if self.epsilon is None else float(self.epsilon)
            if not eps >= 0:
                raise ValidationError(f"epsilon must be >= 0, got {eps}")
            object.__setattr__(self, "epsilon", eps)
        elif self.epsilon is not None:
            raise ValidationError(f"epsilon is only defined for epsInsensitive, not {kind.value}")

    @property
    def nonnegative(self) -> bool:
        """Whether s(u) >= 0 on the whole domain without an offset."""
        return self.kind is not ConvexKind.POISSON

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a serializable dictionary."""
        return {"kind": self.kind.value, "epsilon": self.epsilon}


@dataclass(frozen=True)
class CompositeLoss:
    """
    Composite loss Gamma = g o s.

    Attributes:
        concave: Concave component g
        convex: Convex component s
    """

    concave: ConcaveSpec
    convex: ConvexSpec

    @property
    def label(self) -> str:
        """Label such as 'ccave(1.5)-gaussian'."""
        return f"{self.concave.label}-{self.convex.kind.value}"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a serializable dictionary."""
        return {"concave": self.concave.to_dict(), "convex": self.convex.to_dict()}


@dataclass(frozen=True)
class PenaltySpec:
    """
    Penalty Lambda(beta) = sum_j alpha * p_lambda(|beta_j|) + lambda (1 - alpha)/2 beta_j^2.

    Attributes:
        family: LASSO or SCAD sparsity penalty
        lam: Penalty level lambda >= 0
        alpha: Mixing weight in [0, 1]
        scad_a: SCAD shape parameter a > 2
    """

    family: PenaltyFamily = PenaltyFamily.LASSO
    lam: float = 0.0
    alpha: float = 1.0
    scad_a: float = 3.7

    def __post_init__(self):
        """Validate parameter ranges."""
        object.__setattr__(self, "family", coerce_enum(PenaltyFamily, self.family))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "scad_a", float(self.scad_a))
        if not self.lam >= 0 or math.isinf(self.lam):
            raise ValidationError(f"lambda must be a finite value >= 0, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.scad_a > 2:
            raise ValidationError(f"scad_a must be > 2, got {self.scad_a}")

    @property
    def is_zero(self) -> bool:
        """True when the penalty vanishes identically."""
        return self.lam == 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a serializable dictionary."""
        return {
            "family": self.family.value,
            "lambda": self.lam,
            "alpha": self.alpha,
            "scad_a": self.scad_a,
        }


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    """Copy to a float array of the given rank and mark it read-only."""
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValidationError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """
    Design matrix, response and task.

    Attributes:
        X: n x q design matrix; column 0 is all ones when intercept is True
        y: Response vector of length n
        task: How margins are formed
        intercept: Whether column 0 is an unpenalized intercept
        feature_names: Names of the q columns
    """

    X: np.ndarray
    y: np.ndarray
    task: TaskKind
    intercept: bool = True
    feature_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        """Validate shapes, intercept column and labels."""
        task = coerce_enum(TaskKind, self.task)
        object.__setattr__(self, "task", task)
        X = _frozen_array(self.X, 2, "X")
        y = _frozen_array(self.y, 1, "y")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

        if X.shape[0] != y.shape[0]:
            raise ValidationError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] == 0:
            raise ValidationError("dataset has no observations")
        if self.intercept and (X.shape[1] == 0 or not np.all(X[:, 0] == 1.0)):
            raise ValidationError("intercept=True requires column 0 of X to be all ones")

        if self.feature_names is None:
            if self.intercept:
                names = ["(Intercept)"] + [f"x{j}" for j in range(1, X.shape[1])]
            else:
                names = [f"x{j + 1}" for j in range(X.shape[1])]
        else:
            names = list(self.feature_names)
            if len(names) != X.shape[1]:
                raise ValidationError(
                    f"{len(names)} feature names given for {X.shape[1]} columns"
                )
        object.__setattr__(self, "feature_names", tuple(names))
        validate_labels(y, task)

    @classmethod
    def from_predictors(
        cls,
        predictors,
        y,
        task,
        intercept: bool = True,
        feature_names: Optional[Sequence[str]] = None,
    ) -> "Dataset":
        """
        Build a dataset from a predictor matrix, prepending the intercept column.

        Args:
            predictors: n x p matrix of predictors (no intercept column)
            y: Response vector
            task: Task kind (enum or string)
            intercept: Prepend a column of ones
            feature_names: Optional names of the p predictors

        Returns:
            Dataset instance
        """
        P = np.asarray(predictors, dtype=float)
        if P.ndim == 1:
            P = P.reshape(-1, 1)
        names = list(feature_names) if feature_names is not None else [
            f"x{j + 1}" for j in range(P.shape[1])
        ]
        if intercept:
            X = np.column_stack([np.ones(P.shape[0]), P])
            names = ["(Intercept)"] + names
        else:
            X = P
        return cls(X=X, y=y, task=task, intercept=intercept, feature_names=names)

    @property
    def n(self) -> int:
        """Number of observations."""
        return int(self.X.shape[0])

    @property
    def q(self) -> int:
        """Number of coefficients (including the intercept, if any)."""
        return int(self.X.shape[1])

    @property
    def p(self) -> int:
        """Number of penalized slope coefficients."""
        return self.q - 1 if self.intercept else self.q

    @property
    def slope_index(self) -> np.ndarray:
        """Column indices of the slope coefficients."""
        return np.arange(1 if self.intercept else 0, self.q)

    def subset(self, rows) -> "Dataset":
        """Return a dataset restricted to the given rows."""
        rows = np.asarray(rows)
        return Dataset(
            X=self.X[rows],
            y=self.y[rows],
            task=self.task,
            intercept=self.intercept,
            feature_names=self.feature_names,
        )


def validate_labels(y: np.ndarray, task: TaskKind) -> None:
    """
    Check that response values are admissible for the task.

    Args:
        y: Response vector
        task: Task kind

    Raises:
        ValidationError: If labels are outside the task's support
    """
    if task is TaskKind.CLASSIFICATION:
        bad = ~np.isin(y, (-1.0, 1.0))
        if np.any(bad):
            raise ValidationError(
                f"classification labels must be in {{-1, +1}}; "
                f"found {sorted(set(np.asarray(y)[bad].tolist()))[:5]}"
            )
    elif task is TaskKind.BINOMIAL:
        bad = ~np.isin(y, (0.0, 1.0))
        if np.any(bad):
            raise ValidationError("binomial responses must be in {0, 1}")
    elif task is TaskKind.POISSON:
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise ValidationError("poisson responses must be nonnegative integers")


def check_compatible(data: Dataset, convex: ConvexSpec) -> None:
    """Raise ValidationError if the convex component does not fit the task."""
    allowed = TASK_CONVEX[data.task]
    if convex.kind not in allowed:
        raise ValidationError(
            f"convex component {convex.kind.value} does not apply to task "
            f"{data.task.value}; use one of {sorted(k.value for k in allowed)}"
        )


@dataclass(frozen=True)
class InnerSettings:
    """
    Tolerances and safeguards of the inner weighted solvers.

    Attributes:
        gaussian_tol: Max coordinate change for coordinate descent
        glm_tol: Relative objective change for IRLS
        piecewise_tol: Relative objective change for subgradient descent
        gaussian_max_iter: Coordinate-descent sweeps
        glm_max_iter: IRLS steps
        piecewise_max_iter: Subgradient steps
        max_halvings: Step-halvings allowed per IRLS step
        eta_clamp: Bound on |f| inside exp()
        step_constant: c in the c / sqrt(t) subgradient step size
        lp_polish: Solve piecewise-linear subproblems exactly as an LP
    """

    gaussian_tol: float = 1e-7
    glm_tol: float = 1e-6
    piecewise_tol: float = 1e-4
    gaussian_max_iter: int = 10_000
    glm_max_iter: int = 100
    piecewise_max_iter: int = 50_000
    max_halvings: int = 20
    eta_clamp: float = 30.0
    step_constant: float = 1.0
    lp_polish: bool = True

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "InnerSettings":
        """Build from a configuration section, ignoring None values."""
        known = {k: v for k, v in (values or {}).items() if v is not None}
        unknown = set(known) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown inner setting(s): {sorted(unknown)}")
        return cls(**known)


@dataclass
class InnerProblem:
    """
    One weighted subproblem: argmin (1/n) sum w_i s(u_i(beta)) + Lambda(beta).

    Attributes:
        data: Dataset
        weights: Nonnegative observation weights (w_i = -v_i)
        convex: Convex component
        penalty: Penalty specification
        warm_start: Starting coefficient vector
        tol: Convergence tolerance (None = family default)
        max_iter: Iteration cap (None = family default)
        settings: Remaining solver settings
        penalty_scale: Per-column divisors mapping beta to the coefficients the
            penalty is charged on (None = beta itself)
    """

    data: Dataset
    weights: np.ndarray
    convex: ConvexSpec
    penalty: PenaltySpec
    warm_start: np.ndarray
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    settings: InnerSettings = field(default_factory=InnerSettings)
    penalty_scale: Optional[np.ndarray] = None

    def __post_init__(self):
        """Validate weights and warm start."""
        self.weights = np.asarray(self.weights, dtype=float)
        self.warm_start = np.array(self.warm_start, dtype=float)
        if self.weights.shape != (self.data.n,):
            raise ValidationError(
                f"weights must have length {self.data.n}, got shape {self.weights.shape}"
            )
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValidationError("weights must be finite and nonnegative")
        if self.warm_start.shape != (self.data.q,):
            raise ValidationError(
                f"warm start must have length {self.data.q}, got shape {self.warm_start.shape}"
            )
        if self.tol is not None and not self.tol > 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.penalty_scale is not None:
            self.penalty_scale = np.asarray(self.penalty_scale, dtype=float)
            if self.penalty_scale.shape != (self.data.q,) or not np.all(self.penalty_scale > 0):
                raise ValidationError(
                    f"penalty_scale must hold {self.data.q} positive entries"
                )


@dataclass
class InnerResult:
    """
    Outcome of an inner solve.

    Attributes:
        beta: Coefficient vector
        objective: Weighted penalized objective at beta
        iterations: Iterations used
        converged: False when the iteration cap was hit before the tolerance
        method: Which solver produced beta
    """

    beta: np.ndarray
    objective: float
    iterations: int
    converged: bool = True
    method: str = ""


@dataclass(frozen=True)
class FitConfig:
    """
    Configuration of the outer loop.

    Attributes:
        algorithm: coco, cocots or cocotv
        trim_h: Number of kept observations (cocotv only)
        outer_tol: Relative objective change that stops the loop
        max_outer: Outer iteration cap
        init: Starting point (None = zeros when penalized, least squares otherwise)
        init_beta: Starting vector for init = userVector
        standardize: Standardize slope columns (None = on iff penalized)
        inner: Inner solver settings
        seed: Seed of the trimmed start's random subsets
        n_starts: Random subsets tried by the trimmed start
        n_keep: Subsets refined to convergence by the trimmed start
        record_path: Keep every outer iterate in the result
    """

    algorithm: Algorithm = Algorithm.COCO
    trim_h: Optional[int] = None
    outer_tol: float = 1e-6
    max_outer: int = 200
    init: Optional[InitKind] = None
    init_beta: Optional[Sequence[float]] = None
    standardize: Optional[bool] = None
    inner: InnerSettings = field(default_factory=InnerSettings)
    seed: int = 0
    n_starts: int = 20
    n_keep: int = 5
    record_path: bool = False

    def __post_init__(self):
        """Validate algorithm-specific fields."""
        algorithm = coerce_enum(Algorithm, self.algorithm)
        object.__setattr__(self, "algorithm", algorithm)
        if self.init is not None:
            object.__setattr__(self, "init", coerce_enum(InitKind, self.init))
        if algorithm is Algorithm.COCOTV:
            if self.trim_h is None:
                raise ValidationError("cocotv requires trim_h")
            if int(self.trim_h) < 1:
                raise ValidationError(f"trim_h must be a positive integer, got {self.trim_h}")
        elif self.trim_h is not None:
            raise ValidationError(
                f"trim_h is only used by cocotv; {algorithm.value} trims by the concave sigma"
            )
        if not self.outer_tol > 0:
            raise ValidationError(f"outer_tol must be > 0, got {self.outer_tol}")
        if self.max_outer < 1:
            raise ValidationError(f"max_outer must be >= 1, got {self.max_outer}")
        if self.init is InitKind.USER and self.init_beta is None:
            raise ValidationError("init = userVector requires init_beta")
        if self.n_starts < 1 or self.n_keep < 1:
            raise ValidationError("n_starts and n_keep must be >= 1")


@dataclass
class FitResult:
    """
    Result of an outer-loop fit.

    Attributes:
        beta: Coefficient vector (original predictor scale)
        dual_v: Final v_i in [-w_max, 0]
        objective_trace: F(beta^(k)) for k = 0, 1, ...
        outer_iters: Outer iterations performed
        converged: Whether the relative-change tolerance was met
        z: s(u_i) at the solution (including any per-observation offset)
        u: Margins at the solution
        algorithm: Algorithm used
        lam: Penalty level of the fit
        inner_warnings: Outer iterations whose inner solve hit its cap
        beta_path: Outer iterates (only when record_path is set)
    """

    beta: np.ndarray
    dual_v: np.ndarray
    objective_trace: List[float]
    outer_iters: int
    converged: bool
    z: np.ndarray
    u: np.ndarray
    algorithm: Algorithm = Algorithm.COCO
    lam: float = 0.0
    inner_warnings: List[int] = field(default_factory=list)
    beta_path: Optional[List[np.ndarray]] = None

    @property
    def weights(self) -> np.ndarray:
        """Observation weights -v_i."""
        return -self.dual_v

    @property
    def objective(self) -> float:
        """Final objective value."""
        return float(self.objective_trace[-1])

    def to_dict(self) -> Dict[str, Any]:
        """Convert result to dictionary for serialization."""
        return {
            "beta": [float(b) for b in self.beta],
            "objective_trace": [float(f) for f in self.objective_trace],
            "outer_iters": self.outer_iters,
            "converged": self.converged,
            "algorithm": self.algorithm.value,
            "lambda": self.lam,
            "inner_warnings": list(self.inner_warnings),
        }


@dataclass(frozen=True)
class ScenarioSpec:
    """
    A simulation design.

    Attributes:
        example: ex1, ex2 or ex3
        contamination: Scheme for ex1/ex2
        flip_pct: Fraction of flipped labels for ex3, in [0, 0.5]
        n_train: Training sample size
        n_tune: Tuning sample size (0 = none)
        n_test: Test sample size
        p: Number of predictors
        seed: 64-bit seed
        contamination_rate: Fraction of contaminated training rows (ex1/ex2)
        flip_test: Flip test labels too (ex3), so the Bayes row equals the flip rate
    """

    example: Example
    contamination: Contamination = Contamination.NONE
    flip_pct: float = 0.0
    n_train: Optional[int] = None
    n_tune: Optional[int] = None
    n_test: Optional[int] = None
    p: Optional[int] = None
    seed: int = 0
    contamination_rate: float = 0.1
    flip_test: bool = True

    def __post_init__(self):
        """Fill per-example defaults and validate."""
        example = coerce_enum(Example, self.example)
        object.__setattr__(self, "example", example)
        object.__setattr__(self, "contamination", coerce_enum(Contamination, self.contamination))
        defaults = {
            Example.EX1: (100, 0, 100, 5),
            Example.EX2: (100, 100, 100, 50),
            Example.EX3: (100, 100, 10_000, 20),
        }[example]
        for name, default in zip(("n_train", "n_tune", "n_test", "p"), defaults):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
        if self.n_train < 1 or self.n_test < 1 or self.n_tune < 0:
            raise ValidationError("sample sizes must be positive")
        minimum_p = {Example.EX1: 5, Example.EX2: 11, Example.EX3: 2}[example]
        if self.p < minimum_p:
            raise ValidationError(f"{example.value} needs p >= {minimum_p}, got {self.p}")
        if not 0.0 <= self.flip_pct <= 0.5:
            raise ValidationError(f"flip_pct must be in [0, 0.5], got {self.flip_pct}")
        if not 0.0 <= self.contamination_rate < 1.0:
            raise ValidationError("contamination_rate must be in [0, 1)")
        if example is Example.EX3 and self.contamination is not Contamination.NONE:
            raise ValidationError("ex3 is contaminated through flip_pct, not a scheme")
        if example is not Example.EX3 and self.flip_pct:
            raise ValidationError("flip_pct only applies to ex3")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def label(self) -> str:
        """Scenario label used in tables."""
        if self.example is Example.EX3:
            return f"ex3-flip{self.flip_pct:g}"
        return f"{self.example.value}-{self.contamination.value}"

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a serializable dictionary."""
        return {
            "example": self.example.value,
            "contamination": self.contamination.value,
            "flip_pct": self.flip_pct,
            "n_train": self.n_train,
            "n_tune": self.n_tune,
            "n_test": self.n_test,
            "p": self.p,
            "seed": self.seed,
            "contamination_rate": self.contamination_rate,
            "flip_test": self.flip_test,
        }


@dataclass
class MetricsReport:
    """
    Test-set metrics of one fit.

    Attributes:
        rmse: Root mean squared prediction error (regression tasks)
        trimmed_rmse: RMSE after dropping the largest squared residuals
        misclass_error: Test error rate (classification tasks)
        sensitivity: Selected signal predictors / signal predictors
        specificity: Excluded noise predictors / noise predictors
    """

    rmse: float = math.nan
    trimmed_rmse: float = math.nan
    misclass_error: float = math.nan
    sensitivity: float = math.nan
    specificity: float = math.nan

    METRICS = ("rmse", "trimmed_rmse", "misclass_error", "sensitivity", "specificity")

    def to_dict(self) -> Dict[str, float]:
        """Convert report to dictionary for serialization."""
        return {name: getattr(self, name) for name in self.METRICS}
