"""Tests for the command-line entry point."""

import csv
import json

import pytest

from fyhopfield import ConfigError, GridSpec
from fyhopfield.cli import EXIT_CONFIG, EXIT_DATA, EXIT_OK, build_config, build_parser, main
from fyhopfield.harness import ResultTable

SMALL = [
    "--dataset", "synthetic-orthogonal",
    "--n-memories", "4",
    "--dim", "8",
    "--seeds", "0",
    "--n-queries", "4",
    "--workers", "1",
    "--max-iter", "5",
]


def parse(*argv):
    return build_config(build_parser().parse_args(list(argv)))


class TestBuildConfig:
    def test_flags_override_defaults(self):
        cfg = parse("noise", "--betas", "0.5", "2", "--separations", "softmax", "entmax:alpha=1.5")
        assert cfg.experiment == "noise"
        assert cfg.betas == [0.5, 2.0]
        assert [s.label for s in cfg.separation_specs()] == ["softmax", "entmax1.5"]

    def test_flags_override_config_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"dim": 12, "n_memories": [3, 6]}))
        cfg = parse("capacity", "--config", str(path), "--dim", "20")
        assert cfg.dim == 20
        assert cfg.n_memories == [3, 6]

    def test_seed_shifts_every_seed(self):
        cfg = parse("capacity", "--seeds", "0", "1", "--seed", "100")
        assert cfg.seeds == [100, 101]

    def test_recall_overrides(self):
        cfg = parse("seq-recall", "--recall-beta", "10", "--recall-inner-beta")
        assert cfg.recall.beta == 10.0
        assert cfg.recall.inner_beta is True
        assert cfg.recall.inner_steps == 20

    def test_grid_flags(self):
        cfg = parse(
            "basins", "--dim", "2", "--grid-lower", "-1", "-2", "--grid-upper", "1", "2",
            "--grid-points", "7",
        )
        assert cfg.grid == GridSpec((-1.0, -2.0), (1.0, 2.0), 7)

    def test_grid_needs_both_corners(self):
        with pytest.raises(ConfigError, match="together"):
            parse("basins", "--grid-lower", "-1", "-1")

    def test_unknown_experiment(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["train"])


class TestMain:
    def test_capacity_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "capacity.csv"
        assert main(["capacity", *SMALL, "--output", str(out)]) == EXIT_OK
        table = ResultTable.from_csv(out)
        assert table.lookup("success_rate", n=4).runs == 1
        assert "success_rate" in capsys.readouterr().out

    def test_bad_separation_is_a_config_error(self):
        assert main(["capacity", *SMALL, "--separations", "bogus"]) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["capacity", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG

    def test_malformed_dataset_is_a_data_error(self, tmp_path):
        garbage = tmp_path / "garbage.idx"
        garbage.write_bytes(b"this is not an idx file at all")
        argv = ["capacity", *SMALL, "--dataset", "idx", "--dataset-path", str(garbage)]
        assert main(argv) == EXIT_DATA

    def test_basins_json(self, tmp_path):
        out = tmp_path / "basins.json"
        argv = [
            "basins", *SMALL, "--dim", "2", "--n-memories", "2",
            "--grid-lower", "-1", "-1", "--grid-upper", "1", "1", "--grid-points", "3",
            "--output", str(out),
        ]
        assert main(argv) == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["grid"]["points"] == 3
        assert list(doc["labels"]) == ["entmax2/identity/beta=1"]
        assert len(doc["labels"]["entmax2/identity/beta=1"]) == 3

    def test_basins_csv_with_energy(self, tmp_path):
        out = tmp_path / "basins.csv"
        argv = [
            "basins", *SMALL, "--dim", "2", "--n-memories", "2",
            "--grid-lower", "-1", "-1", "--grid-upper", "1", "1", "--grid-points", "3",
            "--output", str(out),
        ]
        assert main(argv) == EXIT_OK
        assert out.exists()
        assert (tmp_path / "basins.energy.csv").exists()

    def test_seq_recall_writes_traces(self, tmp_path):
        out = tmp_path / "seq.csv"
        argv = [
            "seq-recall", *SMALL, "--n-memories", "8", "--betas", "10", "--output", str(out),
        ]
        assert main(argv) == EXIT_OK
        traces = json.loads((tmp_path / "seq.traces.json").read_text())
        assert list(traces) == ["entmax2/n=8/beta=10"]
        assert traces["entmax2/n=8/beta=10"]["algorithm"] == "sequential"

        with open(tmp_path / "seq.traces.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["trace", "step", "matched", "similarity"]
        assert len(rows) == 1 + len(traces["entmax2/n=8/beta=10"]["steps"])
        assert {r[0] for r in rows[1:]} == {"entmax2/n=8/beta=10"}
