"""
Utility functions for ccrobust.

This module provides CSV input/output for datasets and result tables, seed
derivation for Monte-Carlo runs and worker-count resolution.
"""

import csv
import math
from multiprocessing import cpu_count
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from src.exceptions import DataFormatError
from src.models import Dataset


def _parse_float(text: Optional[str], column: str, line: int, path: str) -> float:
    if text is None or text.strip() == "":
        raise DataFormatError(f"missing value in column '{column}'", line=line, path=path)
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(
            f"non-numeric value {text!r} in column '{column}'", line=line, path=path
        ) from None


def read_dataset(
    path: str,
    response: str,
    task,
    intercept: bool = True,
    columns: Optional[Sequence[str]] = None,
) -> Dataset:
    """
    Read a comma-separated file with a header row into a Dataset.

    Args:
        path: CSV file path (UTF-8, '.' decimal separator)
        response: Name of the response column
        task: Task kind (enum or string)
        intercept: Prepend an intercept column
        columns: Predictor columns to use (default: all but the response)

    Returns:
        Dataset

    Raises:
        DataFormatError: If the file is empty, ragged, lacks a column or has
            non-numeric values (the message carries the line number)
    """
    try:
        handle = open(path, encoding="utf-8", newline="")
    except OSError as e:
        raise DataFormatError(f"cannot open file: {e.strerror}", path=path) from e

    with handle as f:
        reader = csv.DictReader(f, restkey="__extra__")
        fieldnames = reader.fieldnames
        if not fieldnames:
            raise DataFormatError("file is empty or has no header row", line=1, path=path)
        if response not in fieldnames:
            raise DataFormatError(
                f"response column '{response}' not found; header has {list(fieldnames)}",
                line=1,
                path=path,
            )
        if columns is not None:
            predictors = list(columns)
        else:
            predictors = [c for c in fieldnames if c != response]
        missing = [c for c in predictors if c not in fieldnames]
        if missing:
            raise DataFormatError(f"columns not found: {missing}", line=1, path=path)

        rows: List[List[float]] = []
        ys: List[float] = []
        for row in reader:
            line = reader.line_num
            if "__extra__" in row:
                raise DataFormatError(
                    f"row has {len(fieldnames) + len(row['__extra__'])} fields, "
                    f"header has {len(fieldnames)}",
                    line=line,
                    path=path,
                )
            rows.append([_parse_float(row[c], c, line, path) for c in predictors])
            ys.append(_parse_float(row[response], response, line, path))

    if not rows:
        raise DataFormatError("file has a header but no data rows", line=2, path=path)

    values = np.array(rows, dtype=float).reshape(len(rows), len(predictors))
    if not np.all(np.isfinite(values)) or not np.all(np.isfinite(ys)):
        raise DataFormatError("file contains non-finite values", path=path)
    return Dataset.from_predictors(values, np.array(ys), task, intercept, predictors)


def write_dataset(
    path: str, data: Dataset, response: str = "y", float_format: str = "%.10g"
) -> None:
    """
    Write a dataset as CSV with header x1..xp (the intercept column is omitted) and the response.

    Args:
        path: Output path
        data: Dataset to write
        response: Name of the response column
        float_format: printf-style format for values
    """
    slopes = data.slope_index
    names = [data.feature_names[j] for j in slopes]
    rows = (
        [float_format % v for v in data.X[i, slopes]] + [float_format % data.y[i]]
        for i in range(data.n)
    )
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(names + [response])
        writer.writerows(rows)


def format_value(value: Any, float_format: str = "%.10g") -> Any:
    """Format floats for CSV output; NaN is written as an empty field."""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return ""
        return float_format % value
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_rows(
    path: str,
    fieldnames: Sequence[str],
    rows: Iterable[Dict[str, Any]],
    float_format: str = "%.10g",
) -> None:
    """
    Write dictionaries as a CSV table.

    Args:
        path: Output path
        fieldnames: Column order
        rows: Row dictionaries
        float_format: printf-style format for floats
    """
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_value(v, float_format) for k, v in row.items()})


def ensure_parent(path: str) -> None:
    """Create the parent directory of path if needed."""
    parent = Path(path).parent
    if str(parent) not in ("", "."):
        parent.mkdir(parents=True, exist_ok=True)


def derive_seed(seed: int, run_index: int) -> int:
    """
    Derive the seed of one Monte-Carlo run.

    Args:
        seed: Scenario seed
        run_index: Zero-based run index

    Returns:
        64-bit seed that depends only on (seed, run_index)
    """
    state = np.random.SeedSequence([int(seed) % 2**64, int(run_index)])
    return int(state.generate_state(1, dtype=np.uint64)[0])


def resolve_workers(requested: Optional[int], cap: Optional[int] = None) -> int:
    """
    Number of worker processes to use.

    Args:
        requested: Requested workers (None = CPU count)
        cap: Optional upper bound (COCO_THREADS)

    Returns:
        At least 1 and at most the CPU count
    """
    cpus = cpu_count() or 1
    workers = cpus if requested is None else int(requested)
    if cap is not None:
        workers = min(workers, int(cap))
    return max(1, min(workers, cpus))

