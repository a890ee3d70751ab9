"""Tests for CSV input/output and run helpers."""

import csv
import os
import tempfile
from multiprocessing import cpu_count

import numpy as np
import pytest

from src.exceptions import DataFormatError, ValidationError
from src.models import Dataset, TaskKind
from src.utils import (
    derive_seed,
    format_value,
    read_dataset,
    resolve_workers,
    write_dataset,
    write_rows,
)


@pytest.fixture
def tmpdir_path():
    with tempfile.TemporaryDirectory() as tmpdir:
        yield tmpdir


def _write(directory, text, name="data.csv"):
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    return path


class TestReadDataset:
    """Test reading datasets from CSV."""

    def test_regression(self, tmpdir_path):
        """Test columns, intercept and response are read."""
        path = _write(tmpdir_path, "x1,y,x2\n1,2.5,3\n4,5.5,6\n")
        data = read_dataset(path, "y", "regression")
        assert data.task is TaskKind.REGRESSION
        assert data.feature_names == ("(Intercept)", "x1", "x2")
        np.testing.assert_array_equal(data.X, [[1, 1, 3], [1, 4, 6]])
        np.testing.assert_array_equal(data.y, [2.5, 5.5])

    def test_columns_and_no_intercept(self, tmpdir_path):
        """Test a predictor subset without intercept."""
        path = _write(tmpdir_path, "a,b,label\n1,2,1\n3,4,-1\n")
        data = read_dataset(path, "label", TaskKind.CLASSIFICATION, False, ["b"])
        assert data.feature_names == ("b",)
        assert data.p == 1
        np.testing.assert_array_equal(data.X[:, 0], [2, 4])

    def test_missing_response(self, tmpdir_path):
        """Test the header is checked for the response column."""
        path = _write(tmpdir_path, "x1,x2\n1,2\n")
        with pytest.raises(DataFormatError, match="response column 'y' not found") as info:
            read_dataset(path, "y", "regression")
        assert info.value.line == 1

    def test_missing_predictor(self, tmpdir_path):
        """Test unknown predictor columns are named."""
        path = _write(tmpdir_path, "x1,y\n1,2\n")
        with pytest.raises(DataFormatError, match="x9"):
            read_dataset(path, "y", "regression", columns=["x9"])

    def test_non_numeric_value_line(self, tmpdir_path):
        """Test the message carries path and line number."""
        path = _write(tmpdir_path, "x1,y\n1,2\n3,abc\n")
        with pytest.raises(DataFormatError) as info:
            read_dataset(path, "y", "regression")
        assert info.value.line == 3
        assert str(info.value).startswith(f"{path}:3: ")
        assert "abc" in str(info.value)

    def test_missing_value(self, tmpdir_path):
        """Test an empty field is rejected."""
        path = _write(tmpdir_path, "x1,y\n1,\n")
        with pytest.raises(DataFormatError, match="missing value in column 'y'"):
            read_dataset(path, "y", "regression")

    def test_ragged_row(self, tmpdir_path):
        """Test rows with extra fields are rejected."""
        path = _write(tmpdir_path, "x1,y\n1,2\n1,2,3\n")
        with pytest.raises(DataFormatError, match="row has 3 fields") as info:
            read_dataset(path, "y", "regression")
        assert info.value.line == 3

    def test_empty_inputs(self, tmpdir_path):
        """Test empty files and header-only files."""
        with pytest.raises(DataFormatError, match="no header"):
            read_dataset(_write(tmpdir_path, ""), "y", "regression")
        with pytest.raises(DataFormatError, match="no data rows"):
            read_dataset(_write(tmpdir_path, "x1,y\n", "header.csv"), "y", "regression")

    def test_non_finite(self, tmpdir_path):
        """Test inf values are rejected."""
        path = _write(tmpdir_path, "x1,y\ninf,1\n")
        with pytest.raises(DataFormatError, match="non-finite"):
            read_dataset(path, "y", "regression")

    def test_missing_file(self, tmpdir_path):
        """Test an unreadable path is a data format error."""
        with pytest.raises(DataFormatError, match="cannot open"):
            read_dataset(os.path.join(tmpdir_path, "absent.csv"), "y", "regression")

    def test_invalid_labels(self, tmpdir_path):
        """Test labels outside the task's support are a validation error."""
        path = _write(tmpdir_path, "x1,y\n1,0.5\n")
        with pytest.raises(ValidationError):
            read_dataset(path, "y", "classification")


class TestWriteDataset:
    """Test writing datasets and tables."""

    def test_written_file_reads_back(self, tmpdir_path):
        """Test the intercept column is dropped and the response appended."""
        data = Dataset.from_predictors([[0.5, 1.0], [2.0, -3.0]], [1.0, -1.0], "classification")
        path = os.path.join(tmpdir_path, "nested", "train.csv")
        write_dataset(path, data)
        with open(path, newline="") as f:
            assert next(csv.reader(f)) == ["x1", "x2", "y"]
        again = read_dataset(path, "y", "classification")
        np.testing.assert_array_equal(again.X, data.X)
        np.testing.assert_array_equal(again.y, data.y)

    def test_write_rows(self, tmpdir_path):
        """Test floats are formatted and NaN is left empty."""
        path = os.path.join(tmpdir_path, "table.csv")
        rows = [{"name": "a", "value": 1 / 3}, {"name": "b", "value": float("nan")}]
        write_rows(path, ("name", "value"), rows, "%.3f")
        with open(path, newline="") as f:
            rows = list(csv.DictReader(f))
        assert rows == [{"name": "a", "value": "0.333"}, {"name": "b", "value": ""}]


class TestHelpers:
    """Test small helpers."""

    def test_format_value(self):
        """Test floats, numpy scalars and other values."""
        assert format_value(0.5) == "0.5"
        assert format_value(np.float64(2.0), "%.2f") == "2.00"
        assert format_value(np.nan) == ""
        assert format_value(np.int64(4)) == 4
        assert format_value("ccave") == "ccave"

    def test_derive_seed(self):
        """Test seeds depend only on (seed, run) and differ across runs."""
        assert derive_seed(7, 3) == derive_seed(7, 3)
        seeds = {derive_seed(7, r) for r in range(50)}
        assert len(seeds) == 50
        assert derive_seed(7, 0) != derive_seed(8, 0)
        assert 0 <= derive_seed(-1, 0) < 2**64

    def test_resolve_workers(self):
        """Test the CPU count default, the cap and the floor of one."""
        cpus = cpu_count()
        assert resolve_workers(None) == cpus
        assert resolve_workers(None, cap=1) == 1
        assert resolve_workers(10**6) == cpus
        assert resolve_workers(0) == 1
        assert resolve_workers(1, cap=8) == 1
