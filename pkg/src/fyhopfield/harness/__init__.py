"""Batch experiments: configuration, datasets, result tables and sweep runners."""

from .config import ExperimentConfig
from .data import (
    corrupt,
    load_dataset,
    load_flat_matrix,
    load_idx_images,
    load_queries,
    read_idx_images,
    synth_patterns,
    write_flat_matrix,
)
from .experiments import (
    BasinMaps,
    census,
    run_basins,
    run_capacity,
    run_jobs,
    run_metastable,
    run_noise,
    run_recall,
)
from .results import ResultRow, ResultTable, write_grid_csv, write_traces_csv

__all__ = [
    "ExperimentConfig",
    # Data
    "corrupt",
    "load_dataset",
    "load_flat_matrix",
    "load_idx_images",
    "load_queries",
    "read_idx_images",
    "synth_patterns",
    "write_flat_matrix",
    # Experiments
    "BasinMaps",
    "census",
    "run_basins",
    "run_capacity",
    "run_jobs",
    "run_metastable",
    "run_noise",
    "run_recall",
    # Results
    "ResultRow",
    "ResultTable",
    "write_grid_csv",
    "write_traces_csv",
]
