"""Simulation designs, metrics and the Monte-Carlo harness."""

from src.simulation.estimators import EstimatorSpec, default_estimators, select_estimators
from src.simulation.harness import (
    SimulationResult,
    SimulationSettings,
    run_mc,
    tune_lambda,
    wide_table,
    write_summary,
    write_wide_table,
)
from src.simulation.metrics import metrics
from src.simulation.scenarios import ScenarioData, generate

__all__ = [
    "EstimatorSpec",
    "ScenarioData",
    "SimulationResult",
    "SimulationSettings",
    "default_estimators",
    "generate",
    "metrics",
    "run_mc",
    "select_estimators",
    "tune_lambda",
    "wide_table",
    "write_summary",
    "write_wide_table",
]
