"""Result tables: per-cell medians and interquartile ranges over seeds, as CSV."""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.stats import iqr

from ..errors import DomainError, FormatError
from ..types import GridSpec, RecallTrace

logger = logging.getLogger(__name__)

_STAT_COLUMNS = ("metric", "median", "iqr", "runs")


@dataclass
class ResultRow:
    """One (cell, metric) summary."""

    keys: dict[str, str]
    metric: str
    median: float
    iqr: float
    runs: int


@dataclass
class ResultTable:
    """Rows of (experiment keys…, metric, median, IQR, run count).

    Usage:
        table = ResultTable(key_names=["n", "beta", "sep"])
        table.add({"n": 32, "beta": 1.0, "sep": "entmax2"}, "success_rate", [1.0, 0.9])
        table.to_csv("capacity.csv")
    """

    key_names: list[str] = field(default_factory=list)
    rows: list[ResultRow] = field(default_factory=list)

    def add(self, keys: dict[str, Any], metric: str, values: Sequence[float]) -> ResultRow:
        """Summarize the per-seed values of one metric in one cell."""
        if not values:
            raise DomainError(f"No values for metric '{metric}'")
        if set(keys) != set(self.key_names):
            raise DomainError(f"Row keys {sorted(keys)} do not match {sorted(self.key_names)}")
        arr = np.asarray(values, dtype=np.float64)
        row = ResultRow(
            keys={k: str(keys[k]) for k in self.key_names},
            metric=metric,
            median=float(np.median(arr)),
            iqr=float(iqr(arr)),
            runs=int(arr.size),
        )
        self.rows.append(row)
        return row

    def lookup(self, metric: str, **keys: Any) -> ResultRow:
        """The row for a metric whose keys match the given values."""
        wanted = {k: str(v) for k, v in keys.items()}
        for row in self.rows:
            if row.metric == metric and all(row.keys.get(k) == v for k, v in wanted.items()):
                return row
        raise KeyError(f"No row for metric '{metric}' with {wanted}")

    def medians(self, metric: str) -> list[float]:
        return [r.median for r in self.rows if r.metric == metric]

    @property
    def columns(self) -> list[str]:
        return [*self.key_names, *_STAT_COLUMNS]

    def csv_rows(self) -> Iterator[list[Any]]:
        for r in self.rows:
            keys = (r.keys[k] for k in self.key_names)
            yield [*keys, r.metric, repr(r.median), repr(r.iqr), r.runs]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.columns)
            writer.writerows(self.csv_rows())
        logger.info("wrote %d result rows to %s", len(self.rows), path)

    @classmethod
    def from_csv(cls, path: str | Path) -> ResultTable:
        with open(path, newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration as e:
                raise FormatError(f"{path} is empty") from e
            if tuple(header[-len(_STAT_COLUMNS):]) != _STAT_COLUMNS:
                raise FormatError(f"{path} does not end with columns {_STAT_COLUMNS}")
            key_names = header[: -len(_STAT_COLUMNS)]
            table = cls(key_names=key_names)
            for record in reader:
                if len(record) != len(header):
                    raise FormatError(
                        f"{path}: row has {len(record)} fields, expected {len(header)}"
                    )
                k = len(key_names)
                table.rows.append(
                    ResultRow(
                        keys=dict(zip(key_names, record[:k])),
                        metric=record[k],
                        median=float(record[k + 1]),
                        iqr=float(record[k + 2]),
                        runs=int(record[k + 3]),
                    )
                )
        return table

    def __len__(self) -> int:
        return len(self.rows)

    def __str__(self) -> str:
        lines = [" | ".join(self.columns)]
        lines.append("-" * 60)
        for r in self.rows:
            cells = [r.keys[k] for k in self.key_names]
            stats = [r.metric, f"{r.median:.4g}", f"{r.iqr:.4g}", str(r.runs)]
            lines.append(" | ".join([*cells, *stats]))
        return "\n".join(lines)


def write_grid_csv(
    path: str | Path, grid: GridSpec, labelled: dict[str, NDArray[Any]], value_name: str = "label"
) -> None:
    """One row per (name, grid cell): name, cell index, coordinates, value."""
    coords = grid.queries()
    axes = ["x", "y", "z"][: grid.dim]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["name", "cell", *axes, value_name])
        for name, values in labelled.items():
            flat = np.asarray(values).ravel()
            for cell, (point, value) in enumerate(zip(coords, flat)):
                writer.writerow([name, cell, *(repr(float(c)) for c in point), value.item()])
    logger.info("wrote %d grids to %s", len(labelled), path)


def write_traces_csv(path: str | Path, traces: dict[str, RecallTrace]) -> None:
    """All recall traces in one file: trace name, then the trace's own columns."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["trace", *RecallTrace.CSV_COLUMNS])
        for name, trace in traces.items():
            writer.writerows([name, *row] for row in trace.csv_rows())
    logger.info("wrote %d recall traces to %s", len(traces), path)
