"""
Shared helpers for scenario runs.
Number formatting, CSV output and the ordered sweep runner.
"""

import csv
import logging
import math
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import Future, ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from .errors import SweepError

logger = logging.getLogger(__name__)

Point = dict[str, float]
Row = dict[str, Any]


def format_value(value: Any) -> str:
    """Shortest round-trip text for a cell; NaN and None become an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def collect_columns(rows: Sequence[Row]) -> list[str]:
    """Union of row keys in first-seen order."""
    columns: dict[str, None] = {}
    for row in rows:
        for key in row:
            columns.setdefault(key, None)
    return list(columns)


def write_csv(path: Path, rows: Sequence[Row], columns: Sequence[str] | None = None) -> Path:
    """
    Write rows with a header line.

    Args:
        path: Destination file; parent directories are created
        rows: Row dictionaries; missing keys become empty cells
        columns: Column order, defaults to the keys in first-seen order

    Returns:
        The written path
    """
    if columns is None:
        columns = collect_columns(rows)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    """Read a CSV written by write_csv back as string cells."""
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def run_sweep(
    worker: Callable[[Point], list[Row]],
    points: Sequence[Point],
    jobs: int = 1,
) -> Iterator[tuple[Point, list[Row]]]:
    """
    Evaluate `worker` on every grid point and yield results in grid order.

    With jobs > 1 the points run on a process pool; completion order does not
    change the yield order. `worker` must be picklable in that case.

    Raises:
        SweepError: On the first failing point, after every earlier point was
            yielded
    """
    if jobs <= 1 or len(points) <= 1:
        for point in points:
            try:
                rows = worker(point)
            except Exception as e:
                raise SweepError(point, e) from e
            yield point, rows
        return

    executor = ProcessPoolExecutor(max_workers=min(jobs, len(points)))
    try:
        futures: list[Future] = [executor.submit(worker, point) for point in points]
        for point, future in zip(points, futures):
            try:
                rows = future.result()
            except Exception as e:
                executor.shutdown(wait=False, cancel_futures=True)
                raise SweepError(point, e) from e
            yield point, rows
    finally:
        executor.shutdown(wait=True, cancel_futures=True)
