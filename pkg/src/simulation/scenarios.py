"""
Scenario generators.

- ex1: linear regression, p = 5, AR(0.5) Gaussian predictors, N(0, 0.5^2) errors
- ex2: sparse linear regression, p = 50, five nonzero coefficients
- ex3: linear classification on the unit disk with 18 uniform noise predictors

Regression training (and tuning) data may be contaminated with vertical
outliers, optionally with leverage; test data never are. Classification
labels are contaminated by flipping.
"""

import math
from dataclasses import dataclass
from typing import FrozenSet, Optional

import numpy as np

from src.models import Contamination, Dataset, Example, ScenarioSpec, TaskKind

NOISE_SD = 0.5
OUTLIER_MEAN = 20.0
LEVERAGE_MEAN = 50.0
CORRELATION = 0.5

EX1_COEFFICIENTS = (1.5, 0.5, 1.0, 1.5, 1.0)
# 1-based predictor index -> coefficient
EX2_COEFFICIENTS = {1: 1.5, 2: 0.5, 4: 1.0, 7: 1.5, 11: 1.0}


@dataclass(frozen=True)
class ScenarioData:
    """
    Generated datasets of one scenario draw.

    Attributes:
        train: Training data (possibly contaminated)
        tune: Tuning data (None when n_tune = 0)
        test: Clean test data (labels flipped only when flip_test is set)
        true_beta: Generating coefficients, aligned with the dataset columns
        signal: 0-based indices of the nonzero slope coefficients
        contaminated: Contaminated or flipped training rows
    """

    train: Dataset
    tune: Optional[Dataset]
    test: Dataset
    true_beta: np.ndarray
    signal: FrozenSet[int]
    contaminated: np.ndarray


def contamination_count(rate: float, n: int) -> int:
    """Number of contaminated rows, ceil(rate * n) without float round-up."""
    return int(math.ceil(round(rate * n, 9)))


def true_slopes(spec: ScenarioSpec) -> np.ndarray:
    """Generating slope coefficients (ex3: the Bayes rule x1 - x2)."""
    beta = np.zeros(spec.p)
    if spec.example is Example.EX1:
        beta[: len(EX1_COEFFICIENTS)] = EX1_COEFFICIENTS
    elif spec.example is Example.EX2:
        for index, value in EX2_COEFFICIENTS.items():
            beta[index - 1] = value
    else:
        beta[0], beta[1] = 1.0, -1.0
    return beta


def true_beta(spec: ScenarioSpec) -> np.ndarray:
    """Generating coefficients including the zero intercept for regression designs."""
    slopes = true_slopes(spec)
    if spec.example is Example.EX3:
        return slopes
    return np.concatenate([[0.0], slopes])


def ar_covariance(p: int, rho: float = CORRELATION) -> np.ndarray:
    """Covariance with entries rho^|i-j|."""
    index = np.arange(p)
    return rho ** np.abs(index[:, None] - index[None, :])


def _names(p: int):
    return [f"x{j + 1}" for j in range(p)]


def _regression_split(
    rng: np.random.Generator,
    spec: ScenarioSpec,
    n: int,
    factor: np.ndarray,
    slopes: np.ndarray,
    contaminate: bool,
):
    X = rng.standard_normal((n, spec.p)) @ factor.T
    eps = rng.normal(0.0, NOISE_SD, size=n)
    rows = np.array([], dtype=int)
    if contaminate and spec.contamination is not Contamination.NONE:
        count = contamination_count(spec.contamination_rate, n)
        rows = np.sort(rng.choice(n, size=count, replace=False))
        eps[rows] = rng.normal(OUTLIER_MEAN, NOISE_SD, size=len(rows))
    y = X @ slopes + eps
    if len(rows) and spec.contamination is Contamination.VERTICAL_LEVERAGE:
        # leverage is added after the response is generated
        X[rows] = rng.normal(LEVERAGE_MEAN, 1.0, size=(len(rows), spec.p))
    data = Dataset.from_predictors(X, y, TaskKind.REGRESSION, True, _names(spec.p))
    return data, rows


def _disk_split(rng: np.random.Generator, spec: ScenarioSpec, n: int, flip: bool):
    radius = np.sqrt(rng.uniform(size=n))
    angle = rng.uniform(0.0, 2 * math.pi, size=n)
    X = np.empty((n, spec.p))
    X[:, 0] = radius * np.cos(angle)
    X[:, 1] = radius * np.sin(angle)
    X[:, 2:] = rng.uniform(-1.0, 1.0, size=(n, spec.p - 2))
    y = np.where(X[:, 0] >= X[:, 1], 1.0, -1.0)
    rows = np.array([], dtype=int)
    if flip and spec.flip_pct > 0:
        rows = np.sort(rng.choice(n, size=int(round(spec.flip_pct * n)), replace=False))
        y[rows] = -y[rows]
    data = Dataset.from_predictors(X, y, TaskKind.CLASSIFICATION, False, _names(spec.p))
    return data, rows


def generate(spec: ScenarioSpec) -> ScenarioData:
    """
    Draw the train, tune and test datasets of a scenario.

    Args:
        spec: Scenario specification; the draw depends only on spec.seed

    Returns:
        ScenarioData
    """
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed % 2**64))
    slopes = true_slopes(spec)
    signal = frozenset(int(j) for j in np.flatnonzero(slopes))

    if spec.example is Example.EX3:
        train, rows = _disk_split(rng, spec, spec.n_train, flip=True)
        tune = _disk_split(rng, spec, spec.n_tune, flip=True)[0] if spec.n_tune else None
        test = _disk_split(rng, spec, spec.n_test, flip=spec.flip_test)[0]
    else:
        factor = np.linalg.cholesky(ar_covariance(spec.p))
        train, rows = _regression_split(rng, spec, spec.n_train, factor, slopes, True)
        tune = (
            _regression_split(rng, spec, spec.n_tune, factor, slopes, True)[0]
            if spec.n_tune
            else None
        )
        test = _regression_split(rng, spec, spec.n_test, factor, slopes, False)[0]

    return ScenarioData(
        train=train,
        tune=tune,
        test=test,
        true_beta=true_beta(spec),
        signal=signal,
        contaminated=rows,
    )
