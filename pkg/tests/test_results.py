"""Tests for result tables and grid CSV output."""

import csv

import numpy as np
import pytest

import fyhopfield as fh
from fyhopfield import GridSpec
from fyhopfield.harness import ResultTable, write_grid_csv


@pytest.fixture
def table() -> ResultTable:
    t = ResultTable(key_names=["n", "separation"])
    t.add({"n": 8, "separation": "entmax2"}, "success_rate", [1.0, 2.0, 3.0, 4.0])
    t.add({"n": 16, "separation": "entmax2"}, "success_rate", [0.5])
    return t


class TestResultTable:
    def test_median_and_iqr(self, table):
        row = table.lookup("success_rate", n=8)
        assert row.median == 2.5
        assert row.iqr == 1.5
        assert row.runs == 4

    def test_single_run_has_zero_spread(self, table):
        assert table.lookup("success_rate", n=16).iqr == 0.0

    def test_medians(self, table):
        assert table.medians("success_rate") == [2.5, 0.5]

    def test_missing_row(self, table):
        with pytest.raises(KeyError):
            table.lookup("success_rate", n=32)

    def test_keys_must_match(self, table):
        with pytest.raises(fh.DomainError, match="do not match"):
            table.add({"n": 8}, "success_rate", [1.0])

    def test_needs_values(self, table):
        with pytest.raises(fh.DomainError, match="No values"):
            table.add({"n": 8, "separation": "softmax"}, "success_rate", [])

    def test_csv_survives_disk(self, table, tmp_path):
        path = tmp_path / "out.csv"
        table.to_csv(path)
        loaded = ResultTable.from_csv(path)
        assert loaded.columns == ["n", "separation", "metric", "median", "iqr", "runs"]
        assert loaded.rows == table.rows

    def test_csv_with_wrong_header(self, tmp_path):
        path = tmp_path / "out.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(fh.FormatError, match="columns"):
            ResultTable.from_csv(path)

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "out.csv"
        path.write_text("")
        with pytest.raises(fh.FormatError, match="empty"):
            ResultTable.from_csv(path)

    def test_str_lists_every_row(self, table):
        text = str(table)
        assert "entmax2" in text
        assert len(text.splitlines()) == 2 + len(table)


class TestWriteGridCsv:
    def test_one_row_per_cell(self, tmp_path):
        grid = GridSpec((-1, -1), (1, 1), 3)
        labels = np.arange(9).reshape(3, 3)
        write_grid_csv(tmp_path / "grid.csv", grid, {"softmax": labels})
        with open(tmp_path / "grid.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["name", "cell", "x", "y", "label"]
        assert len(rows) == 10
        assert rows[1] == ["softmax", "0", "-1.0", "-1.0", "0"]
        assert rows[-1] == ["softmax", "8", "1.0", "1.0", "8"]
