"""Robust estimation with composite (concave o convex) losses."""

__version__ = "1.0.0"
__description__ = "CC-family composite losses and the COCO reweighting algorithms"

from src.config import ConfigManager
from src.engine import fit, fit_path, predict
from src.models import (
    Algorithm,
    CompositeLoss,
    ConcaveKind,
    ConcaveSpec,
    ConvexKind,
    ConvexSpec,
    Dataset,
    FitConfig,
    FitResult,
    PenaltyFamily,
    PenaltySpec,
    TaskKind,
)

__all__ = [
    "Algorithm",
    "CompositeLoss",
    "ConcaveKind",
    "ConcaveSpec",
    "ConfigManager",
    "ConvexKind",
    "ConvexSpec",
    "Dataset",
    "FitConfig",
    "FitResult",
    "PenaltyFamily",
    "PenaltySpec",
    "TaskKind",
    "fit",
    "fit_path",
    "predict",
]
