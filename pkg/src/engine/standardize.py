"""
Column standardization for penalized fits.

Slope columns are centered (when the model has an intercept) and scaled to
unit variance; constant columns are left untouched. Coefficients move
between the two coordinate systems with to_internal / to_original. The
engine charges the penalty on original-scale coefficients, so the map only
conditions the inner solvers and the fitted model does not depend on it.
"""

from dataclasses import dataclass

import numpy as np

from src.models import Dataset


@dataclass(frozen=True)
class Standardizer:
    """
    Affine map between original and standardized predictors.

    Attributes:
        center: Per-column shift (zero for the intercept and constant columns)
        scale: Per-column divisor (one for the intercept and constant columns)
        intercept: Whether column 0 is the intercept
    """

    center: np.ndarray
    scale: np.ndarray
    intercept: bool

    @classmethod
    def identity(cls, data: Dataset) -> "Standardizer":
        """A no-op standardizer for the dataset's shape."""
        return cls(np.zeros(data.q), np.ones(data.q), data.intercept)

    @classmethod
    def fit(cls, data: Dataset) -> "Standardizer":
        """
        Compute unweighted column statistics.

        Args:
            data: Dataset to standardize

        Returns:
            Standardizer for the dataset
        """
        X = data.X
        center = np.zeros(data.q)
        scale = np.ones(data.q)
        slopes = data.slope_index
        if data.intercept:
            mean = X[:, slopes].mean(axis=0)
            spread = X[:, slopes].std(axis=0)
        else:
            mean = np.zeros(len(slopes))
            spread = np.sqrt(np.mean(X[:, slopes] ** 2, axis=0))
        constant = spread <= 1e-12 * np.maximum(1.0, np.abs(mean))
        center[slopes] = np.where(constant, 0.0, mean)
        scale[slopes] = np.where(constant, 1.0, spread)
        return cls(center, scale, data.intercept)

    @property
    def is_identity(self) -> bool:
        return not np.any(self.center) and np.all(self.scale == 1.0)

    def transform(self, data: Dataset) -> Dataset:
        """Return the dataset with standardized slope columns."""
        if self.is_identity:
            return data
        X = (data.X - self.center) / self.scale
        return Dataset(
            X=X,
            y=data.y,
            task=data.task,
            intercept=data.intercept,
            feature_names=data.feature_names,
        )

    def restore(self, data: Dataset) -> Dataset:
        """Inverse of transform: the dataset on its original predictor scale."""
        if self.is_identity:
            return data
        return Dataset(
            X=data.X * self.scale + self.center,
            y=data.y,
            task=data.task,
            intercept=data.intercept,
            feature_names=data.feature_names,
        )

    def to_internal(self, beta) -> np.ndarray:
        """Map original-scale coefficients to the standardized system."""
        beta = np.asarray(beta, dtype=float)
        internal = beta * self.scale
        if self.intercept:
            internal[0] = beta[0] + float(np.dot(beta[1:], self.center[1:]))
        return internal

    def to_original(self, beta) -> np.ndarray:
        """Map standardized coefficients back to the original predictors."""
        beta = np.asarray(beta, dtype=float)
        original = beta / self.scale
        if self.intercept:
            original[0] = beta[0] - float(np.dot(original[1:], self.center[1:]))
        return original
