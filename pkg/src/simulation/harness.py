"""
Monte-Carlo harness for the simulation examples.

Runs are independent: run r draws its data from a seed derived from
(scenario seed, r), so serial and parallel schedules give identical results.
Penalized estimators pick lambda on the tuning set by the estimator's own
composite loss over a log-spaced grid.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.engine.coco import fit, fit_multistart, fit_path, lambda_grid, lambda_max, objective
from src.exceptions import CCError, SimulationError, ValidationError
from src.models import (
    CompositeLoss,
    Dataset,
    Example,
    FitConfig,
    FitResult,
    InitKind,
    MetricsReport,
    PenaltySpec,
    ScenarioSpec,
)
from src.simulation.estimators import EstimatorSpec, Reference
from src.simulation.metrics import SummaryRow, aggregate, metrics
from src.simulation.scenarios import ScenarioData, generate
from src.utils import derive_seed, ensure_parent, resolve_workers, write_rows

logger = logging.getLogger(__name__)

# Metrics shown per scenario in the wide table
TABLE_METRICS = {
    Example.EX1: ("rmse",),
    Example.EX2: ("rmse", "sensitivity", "specificity"),
    Example.EX3: ("misclass_error", "sensitivity", "specificity"),
}


@dataclass(frozen=True)
class SimulationSettings:
    """
    Harness settings (the `simulation` configuration section).

    Attributes:
        runs: Monte-Carlo runs
        n_lambda: Size of the tuning grid
        lambda_min_ratio: Smallest grid value relative to lambda_max
        failure_rate_limit: Largest tolerated share of failed fits per estimator
        workers: Worker processes (None = CPU count)
        max_workers: Cap on workers (COCO_THREADS)
        trimmed_rmse_fraction: Share dropped by the trimmed RMSE
        support_threshold: Selection threshold on |beta_j|
        progress: Show a progress bar
    """

    runs: int = 100
    n_lambda: int = 50
    lambda_min_ratio: float = 1e-4
    failure_rate_limit: float = 0.2
    workers: Optional[int] = None
    max_workers: Optional[int] = None
    trimmed_rmse_fraction: float = 0.1
    support_threshold: float = 1e-8
    progress: bool = True

    def __post_init__(self):
        """Validate ranges."""
        if self.runs < 1:
            raise ValidationError(f"runs must be >= 1, got {self.runs}")
        if self.n_lambda < 1 or not 0 < self.lambda_min_ratio < 1:
            raise ValidationError("n_lambda must be >= 1 and lambda_min_ratio in (0, 1)")
        if not 0 <= self.failure_rate_limit <= 1:
            raise ValidationError("failure_rate_limit must be in [0, 1]")

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "SimulationSettings":
        """Build from the configuration section, ignoring None values."""
        known = {k: v for k, v in (values or {}).items() if v is not None}
        return cls(**known)


@dataclass
class RunRecord:
    """Per-run outcome: one report (or None on failure) per estimator."""

    run_index: int
    reports: Dict[str, Optional[MetricsReport]]
    errors: Dict[str, str] = field(default_factory=dict)
    selected_lambda: Dict[str, float] = field(default_factory=dict)


@dataclass
class SimulationResult:
    """
    Outcome of run_mc.

    Attributes:
        scenario: Scenario specification
        estimators: Estimator labels in table order
        summary: Aggregated rows
        records: Per-run records, ordered by run index
    """

    scenario: ScenarioSpec
    estimators: List[str]
    summary: List[SummaryRow]
    records: List[RunRecord]

    def failures(self, estimator: str) -> int:
        return sum(1 for r in self.records if r.reports.get(estimator) is None)

    def to_dict(self) -> Dict[str, Any]:
        """Serializable form with NaN written as null."""
        return {
            "scenario": self.scenario.to_dict(),
            "label": self.scenario.label,
            "runs": len(self.records),
            "estimators": list(self.estimators),
            "summary": [_jsonable(row.to_dict()) for row in self.summary],
            "failures": {name: self.failures(name) for name in self.estimators},
        }


def _jsonable(values: Dict[str, Any]) -> Dict[str, Any]:
    out = {}
    for key, value in values.items():
        if isinstance(value, float) and math.isnan(value):
            value = None
        out[key] = value
    return out


def tune_lambda(
    train: Dataset,
    tune: Dataset,
    loss: CompositeLoss,
    template: PenaltySpec,
    config: FitConfig,
    n_lambda: int = 50,
    ratio: float = 1e-4,
) -> Tuple[FitResult, float]:
    """
    Pick lambda on a tuning set.

    Fits the path from lambda_max down to ratio * lambda_max on the training
    data and keeps the fit with the smallest unpenalized composite loss on the
    tuning data.

    Args:
        train: Training data
        tune: Tuning data
        loss: Composite loss (also the tuning criterion)
        template: Penalty family, alpha and scad_a (lambda is ignored)
        config: Fit configuration
        n_lambda: Grid size
        ratio: Smallest grid value relative to lambda_max

    Returns:
        Tuple of (selected FitResult, selected lambda)
    """
    lmax = lambda_max(train, loss, template, config)
    grid = lambda_grid(lmax, n_lambda, ratio)
    path = fit_path(train, loss, template, config, grid)
    unpenalized = PenaltySpec()
    scores = [objective(r.beta, tune, loss, unpenalized) for r in path]
    best = int(np.argmin(scores))
    logger.debug("selected lambda %.6g (%d of %d)", grid[best], best + 1, len(grid))
    return path[best], float(grid[best])


def tune_and_fit(
    est: EstimatorSpec,
    data: ScenarioData,
    config: FitConfig,
    settings: SimulationSettings,
) -> Tuple[np.ndarray, float]:
    """
    Fit one estimator on one draw.

    Args:
        est: Estimator to fit
        data: Generated datasets
        config: Base fit configuration
        settings: Harness settings

    Returns:
        Tuple of (coefficients, selected lambda)
    """
    if est.reference == Reference.ORACLE or est.reference == Reference.BAYES:
        return data.true_beta, 0.0

    config = replace(config, algorithm=est.algorithm, trim_h=est.trim_h)
    if not est.penalized:
        penalty = PenaltySpec()
        if est.multistart:
            result = fit_multistart(
                data.train, est.loss, penalty, config, (InitKind.LEAST_SQUARES, InitKind.TRIMMED)
            )
        else:
            result = fit(data.train, est.loss, penalty, config)
        return result.beta, 0.0

    if data.tune is None:
        raise ValidationError(f"estimator {est.name!r} is tuned but the scenario has no tuning set")
    template = PenaltySpec(family=est.penalty_family, lam=0.0, alpha=est.alpha)
    result, lam = tune_lambda(
        data.train,
        data.tune,
        est.loss,
        template,
        config,
        settings.n_lambda,
        settings.lambda_min_ratio,
    )
    return result.beta, lam


# Per-worker state, set by _init_worker
_worker_state: Dict[str, Any] = {}


def _init_worker(
    scenario: ScenarioSpec,
    estimators: Sequence[EstimatorSpec],
    config: FitConfig,
    settings: SimulationSettings,
    quiet: bool = True,
) -> None:
    """Initialize shared state in a worker process."""
    _worker_state.update(
        scenario=scenario, estimators=list(estimators), config=config, settings=settings
    )
    if quiet:
        # fits that stop at max_outer are expected in a Monte-Carlo sweep
        logging.getLogger("src.engine").setLevel(logging.ERROR)


def _run_single(run_index: int) -> RunRecord:
    """
    Execute one Monte-Carlo run.

    Args:
        run_index: Zero-based run index

    Returns:
        RunRecord
    """
    scenario: ScenarioSpec = _worker_state["scenario"]
    config: FitConfig = _worker_state["config"]
    settings: SimulationSettings = _worker_state["settings"]

    seed = derive_seed(scenario.seed, run_index)
    data = generate(replace(scenario, seed=seed))
    support = data.signal if scenario.example is not Example.EX1 else None
    record = RunRecord(run_index=run_index, reports={})

    for est in _worker_state["estimators"]:
        try:
            beta, lam = tune_and_fit(est, data, replace(config, seed=seed % 2**32), settings)
            record.reports[est.name] = metrics(
                beta,
                data.test,
                support,
                settings.trimmed_rmse_fraction,
                settings.support_threshold,
            )
            record.selected_lambda[est.name] = lam
        except (CCError, np.linalg.LinAlgError, FloatingPointError) as e:
            record.reports[est.name] = None
            record.errors[est.name] = str(e)
    return record


def run_mc(
    scenario: ScenarioSpec,
    estimators: Sequence[EstimatorSpec],
    runs: Optional[int] = None,
    config: Optional[FitConfig] = None,
    settings: Optional[SimulationSettings] = None,
) -> SimulationResult:
    """
    Run the Monte-Carlo comparison of a scenario.

    Args:
        scenario: Scenario specification
        estimators: Rows to compare (non-empty)
        runs: Number of runs (default: settings.runs)
        config: Base fit configuration
        settings: Harness settings

    Returns:
        SimulationResult

    Raises:
        ValidationError: If the estimator list is empty or names repeat
        SimulationError: If an estimator fails in more than the allowed share of runs
    """
    settings = settings or SimulationSettings()
    if runs is not None:
        settings = replace(settings, runs=runs)
    config = config or FitConfig()
    estimators = list(estimators)
    if not estimators:
        raise ValidationError("at least one estimator is required")
    names = [e.name for e in estimators]
    if len(set(names)) != len(names):
        raise ValidationError(f"estimator names must be unique, got {names}")
    if scenario.example is Example.EX3 and any(e.reference == Reference.ORACLE for e in estimators):
        raise ValidationError("ex3 reports the Bayes rule, not an oracle")

    workers = min(resolve_workers(settings.workers, settings.max_workers), settings.runs)
    initargs = (scenario, estimators, config, settings)
    indices = range(settings.runs)
    desc = f"{scenario.label} ({workers} workers)"

    records: List[RunRecord] = []
    if workers > 1:
        with Pool(processes=workers, initializer=_init_worker, initargs=initargs) as pool:
            iterator = pool.imap(_run_single, indices)
            if settings.progress:
                iterator = tqdm(iterator, total=settings.runs, desc=desc, unit="runs")
            records.extend(iterator)
    else:
        _init_worker(*initargs, quiet=False)
        iterator = tqdm(indices, desc=desc, unit="runs") if settings.progress else indices
        records.extend(_run_single(i) for i in iterator)

    summary: List[SummaryRow] = []
    for name in names:
        reports = [r.reports.get(name) for r in records]
        failed = sum(1 for rep in reports if rep is None)
        if failed:
            first = next(r.errors[name] for r in records if name in r.errors)
            logger.warning(
                "%s: %d of %d runs failed (first error: %s)", name, failed, len(records), first
            )
        if failed / len(records) > settings.failure_rate_limit:
            raise SimulationError(
                f"estimator {name!r} failed in {failed} of {len(records)} runs "
                f"(limit {settings.failure_rate_limit:.0%})"
            )
        summary.extend(aggregate(name, scenario.label, reports))

    return SimulationResult(scenario, names, summary, records)


def write_summary(
    results: Sequence[SimulationResult],
    csv_path: str,
    json_path: str,
    float_format: str = "%.10g",
) -> None:
    """
    Write long-format aggregates as CSV and JSON.

    Args:
        results: One SimulationResult per scenario
        csv_path: CSV output (estimator, scenario, metric, mean, sd, runs)
        json_path: JSON output
        float_format: printf-style format for floats in the CSV
    """
    rows = [row.to_dict() for result in results for row in result.summary]
    write_rows(csv_path, SummaryRow.FIELDS, rows, float_format)
    ensure_parent(json_path)
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump([r.to_dict() for r in results], f, indent=2, sort_keys=True)
        f.write("\n")


def wide_table(results: Sequence[SimulationResult]) -> Tuple[List[str], List[Dict[str, Any]]]:
    """
    Table-shaped layout: one row per estimator, one column per scenario and metric.

    Returns:
        Tuple of (column names, rows)
    """
    columns = ["estimator"]
    by_estimator: Dict[str, Dict[str, Any]] = {}
    for result in results:
        wanted = TABLE_METRICS[result.scenario.example]
        for metric in wanted:
            columns.append(f"{result.scenario.label}/{metric}")
        for name in result.estimators:
            by_estimator.setdefault(name, {"estimator": name})
        for row in result.summary:
            if row.metric in wanted:
                by_estimator[row.estimator][f"{row.scenario}/{row.metric}"] = row.mean
    return columns, list(by_estimator.values())


def write_wide_table(
    results: Sequence[SimulationResult], path: str, float_format: str = "%.3f"
) -> None:
    """Write the table-shaped layout as CSV (missing cells are empty)."""
    columns, rows = wide_table(results)
    write_rows(path, columns, rows, float_format)
