#!/usr/bin/env python3
"""
Unit tests for the common module.

Covers:
- CSV cell formatting and writing
- Ordered sweeps and failure reporting
"""

import math
from pathlib import Path

import numpy as np
import pytest

from qotto.common import collect_columns, format_value, read_csv, run_sweep, write_csv
from qotto.errors import SweepError


def square(point: dict) -> list[dict]:
    return [{"x": point["x"], "y": point["x"] ** 2}]


def fail_at_two(point: dict) -> list[dict]:
    if point["x"] == 2.0:
        raise ValueError("boom")
    return [{"x": point["x"]}]


class TestFormatValue:
    """Tests for format_value."""

    def test_float_round_trips(self):
        """Floats use the shortest exact representation."""
        assert format_value(0.1) == "0.1"
        assert float(format_value(1 / 3)) == 1 / 3

    def test_nan_is_empty(self):
        """NaN becomes an empty cell."""
        assert format_value(math.nan) == ""
        assert format_value(np.float64("nan")) == ""

    def test_none_is_empty(self):
        """None becomes an empty cell."""
        assert format_value(None) == ""

    def test_bools(self):
        """Booleans are written lower-case, numpy ones included."""
        assert format_value(True) == "true"
        assert format_value(np.bool_(False)) == "false"

    def test_integers(self):
        """Integers keep integer form."""
        assert format_value(np.int64(7)) == "7"

    def test_numpy_float(self):
        """numpy floats format like Python floats."""
        assert format_value(np.float64(2.5e-9)) == "2.5e-09"


class TestCsv:
    """Tests for CSV writing."""

    def test_columns_in_first_seen_order(self):
        """Later rows append new columns at the end."""
        rows = [{"a": 1, "b": 2}, {"b": 3, "c": 4}]

        assert collect_columns(rows) == ["a", "b", "c"]

    def test_write_and_read(self, tmp_path: Path):
        """Written rows come back as strings with blanks for missing cells."""
        path = write_csv(tmp_path / "out" / "t.csv", [{"a": 1.5, "b": math.nan}, {"a": 2}])

        rows = read_csv(path)

        assert rows == [{"a": "1.5", "b": ""}, {"a": "2", "b": ""}]

    def test_unix_line_endings(self, tmp_path: Path):
        """Lines end with a bare newline."""
        path = write_csv(tmp_path / "t.csv", [{"a": 1}])

        assert path.read_bytes() == b"a\n1\n"

    def test_explicit_columns(self, tmp_path: Path):
        """An explicit column list fixes order and selection."""
        path = write_csv(tmp_path / "t.csv", [{"a": 1, "b": 2}], columns=["b"])

        assert path.read_text() == "b\n2\n"


class TestRunSweep:
    """Tests for run_sweep."""

    def test_inline_order(self):
        """Results arrive in grid order."""
        points = [{"x": float(x)} for x in range(4)]

        results = list(run_sweep(square, points))

        assert [point for point, _ in results] == points
        assert [rows[0]["y"] for _, rows in results] == [0.0, 1.0, 4.0, 9.0]

    def test_pool_order(self):
        """Worker processes do not change the order."""
        points = [{"x": float(x)} for x in range(6)]

        results = list(run_sweep(square, points, jobs=3))

        assert [rows[0]["x"] for _, rows in results] == [float(x) for x in range(6)]

    def test_failure_names_point(self):
        """A failing point raises SweepError after the earlier points."""
        points = [{"x": 1.0}, {"x": 2.0}, {"x": 3.0}]
        seen = []

        with pytest.raises(SweepError) as excinfo:
            for point, _ in run_sweep(fail_at_two, points):
                seen.append(point)

        assert seen == [{"x": 1.0}]
        assert excinfo.value.point == {"x": 2.0}
        assert "boom" in str(excinfo.value)

    def test_pool_failure(self):
        """Failures inside worker processes surface as SweepError."""
        points = [{"x": 1.0}, {"x": 2.0}, {"x": 3.0}]

        with pytest.raises(SweepError):
            list(run_sweep(fail_at_two, points, jobs=2))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
