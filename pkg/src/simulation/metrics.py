"""
Test-set metrics and their aggregation over Monte-Carlo runs.
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from src.engine.coco import predict
from src.losses.composite import linear_predictor
from src.models import Dataset, FitResult, MetricsReport, TaskKind

SUPPORT_THRESHOLD = 1e-8
TRIMMED_FRACTION = 0.1


def trimmed_rmse(residuals, fraction: float = TRIMMED_FRACTION) -> float:
    """
    RMSE after dropping the largest ceil(fraction * n) squared residuals.

    Args:
        residuals: Test residuals
        fraction: Share of residuals dropped

    Returns:
        Trimmed RMSE
    """
    squared = np.sort(np.asarray(residuals, dtype=float) ** 2)
    drop = int(math.ceil(round(fraction * len(squared), 9)))
    kept = squared[: len(squared) - drop] if drop < len(squared) else squared[:1]
    return float(np.sqrt(np.mean(kept)))


def support_rates(
    beta: np.ndarray,
    data: Dataset,
    true_support: Iterable[int],
    threshold: float = SUPPORT_THRESHOLD,
) -> Dict[str, float]:
    """
    Sensitivity and specificity of the selected slopes.

    Args:
        beta: Coefficient vector aligned with the dataset columns
        data: Dataset (only its layout is used)
        true_support: 0-based indices of the nonzero slopes
        threshold: |beta_j| above this counts as selected

    Returns:
        Dict with sensitivity and specificity (NaN when undefined)
    """
    slopes = np.asarray(beta, dtype=float)[data.slope_index]
    selected = np.abs(slopes) > threshold
    truth = np.zeros(len(slopes), dtype=bool)
    truth[list(true_support)] = True
    n_signal = int(truth.sum())
    n_noise = len(truth) - n_signal
    sen = float(np.sum(selected & truth)) / n_signal if n_signal else math.nan
    spc = float(np.sum(~selected & ~truth)) / n_noise if n_noise else math.nan
    return {"sensitivity": sen, "specificity": spc}


def metrics(
    fit: Union[FitResult, np.ndarray, Sequence[float]],
    test: Dataset,
    true_support: Optional[Iterable[int]] = None,
    trimmed_fraction: float = TRIMMED_FRACTION,
    support_threshold: float = SUPPORT_THRESHOLD,
) -> MetricsReport:
    """
    Evaluate a fit on test data.

    Regression-type tasks report RMSE and trimmed RMSE of y minus the
    predicted mean; classification reports the error rate with sign(0) = +1.
    Metrics that do not apply are NaN.

    Args:
        fit: FitResult or coefficient vector
        test: Test dataset
        true_support: 0-based indices of the true nonzero slopes
        trimmed_fraction: Share of squared residuals dropped by the trimmed RMSE
        support_threshold: Selection threshold on |beta_j|

    Returns:
        MetricsReport
    """
    beta = fit.beta if isinstance(fit, FitResult) else np.asarray(fit, dtype=float)
    report = MetricsReport()

    if test.task is TaskKind.CLASSIFICATION:
        report.misclass_error = float(np.mean(predict(beta, test) != test.y))
    else:
        if test.task is TaskKind.REGRESSION:
            residuals = test.y - linear_predictor(beta, test)
        else:
            residuals = test.y - predict(beta, test)
        report.rmse = float(np.sqrt(np.mean(residuals**2)))
        report.trimmed_rmse = trimmed_rmse(residuals, trimmed_fraction)

    if true_support is not None:
        rates = support_rates(beta, test, true_support, support_threshold)
        report.sensitivity = rates["sensitivity"]
        report.specificity = rates["specificity"]
    return report


@dataclass
class SummaryRow:
    """
    Aggregate of one metric for one estimator and scenario.

    Attributes:
        estimator: Estimator label
        scenario: Scenario label
        metric: Metric name
        mean: Mean over runs with a value
        sd: Sample standard deviation (NaN for fewer than two runs)
        runs: Number of runs with a value
    """

    estimator: str
    scenario: str
    metric: str
    mean: float
    sd: float
    runs: int

    FIELDS = ("estimator", "scenario", "metric", "mean", "sd", "runs")

    def to_dict(self) -> Dict[str, object]:
        return {name: getattr(self, name) for name in self.FIELDS}


def aggregate(
    estimator: str,
    scenario: str,
    reports: List[Optional[MetricsReport]],
) -> List[SummaryRow]:
    """
    Summarize per-run reports; failed runs (None) and NaN values are skipped.

    Returns:
        One SummaryRow per metric that has at least one value
    """
    rows = []
    for name in MetricsReport.METRICS:
        values = np.array(
            [getattr(r, name) for r in reports if r is not None], dtype=float
        )
        values = values[~np.isnan(values)]
        if values.size == 0:
            continue
        sd = float(np.std(values, ddof=1)) if values.size > 1 else math.nan
        mean = float(np.mean(values))
        rows.append(SummaryRow(estimator, scenario, name, mean, sd, int(values.size)))
    return rows
