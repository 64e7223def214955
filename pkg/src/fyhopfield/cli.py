"""Command-line entry point: `fyhopfield <experiment> [--config FILE] [overrides]`.

Exit codes: 0 on success, 2 on a configuration or parameter error, 3 on a
data error (unreadable or malformed files, exhausted pattern budgets).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CapacityError, ConfigError, DomainError, FormatError
from .harness.config import EXPERIMENTS, ExperimentConfig
from .harness.experiments import (
    BasinMaps,
    run_basins,
    run_capacity,
    run_metastable,
    run_noise,
    run_recall,
)
from .harness.results import ResultTable, write_grid_csv, write_traces_csv
from .types import GridSpec, RecallTrace

logger = logging.getLogger("fyhopfield")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

# config field -> (element type, takes a list)
_CONFIG_FLAGS: dict[str, tuple[type, bool]] = {
    "dataset": (str, False),
    "dataset_path": (str, False),
    "query_path": (str, False),
    "n_memories": (int, True),
    "dim": (int, False),
    "radius": (float, False),
    "min_separation": (float, False),
    "n_queries": (int, False),
    "betas": (float, True),
    "separations": (str, True),
    "posts": (str, True),
    "corruption": (str, False),
    "noise": (float, True),
    "mask_fraction": (float, False),
    "seeds": (int, True),
    "max_iter": (int, False),
    "match_threshold": (float, False),
    "algorithm": (str, False),
    "workers": (int, False),
}

_RECALL_FLAGS: dict[str, type] = {
    "beta": float,
    "inner_steps": int,
    "penalty": float,
    "decay": float,
    "alpha": float,
    "boost": float,
    "transition": float,
    "match_threshold": float,
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--output", help="CSV (tables, basin grids) or JSON (grids) output path")
    common.add_argument("--seed", type=int, help="base seed added to every configured seed")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    fields = common.add_argument_group("config overrides")
    for name, (kind, many) in _CONFIG_FLAGS.items():
        fields.add_argument(
            _flag(name), dest=name, type=kind, nargs="+" if many else None, default=None
        )

    recall = common.add_argument_group("recall overrides")
    for name, kind in _RECALL_FLAGS.items():
        recall.add_argument(_flag(f"recall_{name}"), dest=f"recall_{name}", type=kind)
    recall.add_argument(
        "--recall-inner-beta", dest="recall_inner_beta", action="store_const", const=True,
        help="scale the inner sequential-recall updates by beta",
    )

    grid = common.add_argument_group("basin grid overrides")
    grid.add_argument("--grid-lower", type=float, nargs="+")
    grid.add_argument("--grid-upper", type=float, nargs="+")
    grid.add_argument("--grid-points", type=int)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fyhopfield",
        description="Sparse and structured associative memory experiments",
    )
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=f"run the {name} experiment")
    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """The loaded (or default) config with every given flag applied on top."""
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides: dict[str, Any] = {name: getattr(args, name) for name in _CONFIG_FLAGS}
    overrides["experiment"] = args.command
    overrides["output"] = args.output
    cfg = cfg.with_overrides(**overrides)

    if args.seed is not None:
        cfg = cfg.with_overrides(seeds=[args.seed + s for s in cfg.seeds])

    recall = {
        name: getattr(args, f"recall_{name}")
        for name in [*_RECALL_FLAGS, "inner_beta"]
        if getattr(args, f"recall_{name}") is not None
    }
    if recall:
        cfg = cfg.with_overrides(recall=dataclasses.replace(cfg.recall, **recall))

    if args.grid_lower is not None or args.grid_upper is not None:
        if args.grid_lower is None or args.grid_upper is None:
            raise ConfigError("--grid-lower and --grid-upper must be given together")
        points = args.grid_points or (cfg.grid.points if cfg.grid else 50)
        cfg = cfg.with_overrides(
            grid=GridSpec(tuple(args.grid_lower), tuple(args.grid_upper), points)
        )
    elif args.grid_points is not None:
        if cfg.grid is None:
            raise ConfigError("--grid-points needs a grid from the config or --grid-lower/upper")
        cfg = cfg.with_overrides(grid=dataclasses.replace(cfg.grid, points=args.grid_points))
    return cfg


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _write_table(table: ResultTable, output: str | None) -> None:
    print(table)
    if output:
        table.to_csv(output)


def _write_traces(traces: dict[str, RecallTrace], output: str) -> None:
    """Full traces as JSON next to the table, plus a flat CSV for plotting."""
    path = Path(output).with_suffix(".traces.json")
    path.write_text(json.dumps({k: t.to_dict() for k, t in traces.items()}, indent=2))
    logger.info("wrote %d recall traces to %s", len(traces), path)
    write_traces_csv(Path(output).with_suffix(".traces.csv"), traces)


def _write_basins(maps: BasinMaps, output: str | None) -> None:
    for name, labels in maps.labels.items():
        values, counts = np.unique(labels, return_counts=True)
        summary = ", ".join(f"{int(v)}: {int(c)}" for v, c in zip(values, counts))
        print(f"{name}  [{summary}]")
    if not output:
        return
    if output.endswith(".json"):
        doc = {
            "grid": maps.grid.to_dict(),
            "labels": {k: v.tolist() for k, v in maps.labels.items()},
            "energies": {k: v.tolist() for k, v in maps.energies.items()},
        }
        Path(output).write_text(json.dumps(doc))
        logger.info("wrote %d basin grids to %s", len(maps.labels), output)
        return
    write_grid_csv(output, maps.grid, maps.labels)
    if maps.energies:
        write_grid_csv(
            Path(output).with_suffix(".energy.csv"), maps.grid, maps.energies, "energy"
        )


def run(cfg: ExperimentConfig) -> None:
    if cfg.experiment == "basins":
        _write_basins(run_basins(cfg), cfg.output)
    elif cfg.experiment in ("free-recall", "seq-recall"):
        traces: dict[str, RecallTrace] = {}
        _write_table(run_recall(cfg, traces), cfg.output)
        if cfg.output:
            _write_traces(traces, cfg.output)
    elif cfg.experiment == "metastable":
        _write_table(run_metastable(cfg), cfg.output)
    elif cfg.experiment == "noise":
        _write_table(run_noise(cfg), cfg.output)
    else:
        _write_table(run_capacity(cfg), cfg.output)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose, args.quiet)
    try:
        cfg = build_config(args)
        run(cfg)
    except (ConfigError, DomainError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except (FormatError, CapacityError, OSError) as e:
        logger.error("%s", e)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
