"""Experiment configuration: one JSON document per run, overridable from the CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..errors import ConfigError, DomainError
from ..types import GridSpec, PostSpec, RecallConfig, SeparationSpec

EXPERIMENTS = ("capacity", "noise", "metastable", "basins", "free-recall", "seq-recall")
DATASETS = (
    "synthetic-sphere",
    "synthetic-gaussian",
    "synthetic-orthogonal",
    "synthetic-binary",
    "idx",
    "flat",
)
RECALL_ALGORITHMS = ("constrained", "penalized")
CORRUPTIONS = ("gaussian", "mask")

_LIST_FIELDS = ("n_memories", "betas", "separations", "posts", "noise", "seeds")


@dataclass
class ExperimentConfig:
    """Everything a batch experiment needs.

    Usage:
        cfg = ExperimentConfig.from_file("capacity.json")
        cfg = cfg.with_overrides(betas=[0.1, 1.0])
    """

    experiment: str = "capacity"
    dataset: str = "synthetic-sphere"
    dataset_path: str | None = None
    query_path: str | None = None
    n_memories: list[int] = field(default_factory=lambda: [32])
    dim: int = 64
    radius: float = 1.0
    min_separation: float | None = None
    n_queries: int = 100
    betas: list[float] = field(default_factory=lambda: [1.0])
    separations: list[Any] = field(default_factory=lambda: ["entmax:alpha=2"])
    posts: list[Any] = field(default_factory=lambda: ["identity"])
    corruption: str = "gaussian"
    noise: list[float] = field(default_factory=lambda: [0.0])
    mask_fraction: float = 0.0
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    max_iter: int = 20
    match_threshold: float = 0.9
    algorithm: str = "constrained"
    recall: RecallConfig = field(default_factory=RecallConfig)
    grid: GridSpec | None = None
    workers: int = 4
    output: str | None = None

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"Unknown experiment '{self.experiment}'; expected one of {EXPERIMENTS}"
            )
        if self.dataset not in DATASETS:
            raise ConfigError(f"Unknown dataset '{self.dataset}'; expected one of {DATASETS}")
        if self.dataset in ("idx", "flat") and not self.dataset_path:
            raise ConfigError(f"Dataset '{self.dataset}' needs dataset_path")
        if self.algorithm not in RECALL_ALGORITHMS:
            raise ConfigError(f"Unknown recall algorithm '{self.algorithm}'")
        if self.corruption not in CORRUPTIONS:
            raise ConfigError(f"Unknown corruption '{self.corruption}'")
        for name in _LIST_FIELDS:
            if not getattr(self, name):
                raise ConfigError(f"'{name}' must be a non-empty list")
        if any(n < 1 for n in self.n_memories):
            raise ConfigError("memory sizes must be >= 1")
        if any(b <= 0 for b in self.betas):
            raise ConfigError("betas must be positive")
        if any(s < 0 for s in self.noise):
            raise ConfigError("noise levels must be non-negative")
        if not 0.0 <= self.mask_fraction <= 1.0:
            raise ConfigError(f"mask_fraction must lie in [0, 1], got {self.mask_fraction}")
        if self.dim < 1 or self.n_queries < 1 or self.max_iter < 1 or self.workers < 1:
            raise ConfigError("dim, n_queries, max_iter and workers must be >= 1")
        if self.radius <= 0:
            raise ConfigError(f"radius must be positive, got {self.radius}")
        # every spec string must parse
        self.separation_specs()
        self.post_specs()

    def separation_specs(self) -> list[SeparationSpec]:
        try:
            return [
                SeparationSpec.parse(s) if isinstance(s, str) else SeparationSpec.from_dict(s)
                for s in self.separations
            ]
        except (DomainError, KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"Bad separation spec: {e}") from e

    def post_specs(self) -> list[PostSpec]:
        try:
            return [
                PostSpec.parse(s) if isinstance(s, str) else PostSpec.from_dict(s)
                for s in self.posts
            ]
        except (DomainError, KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"Bad post-transformation spec: {e}") from e

    def with_overrides(self, **overrides: Any) -> ExperimentConfig:
        """A copy with the given fields replaced; None values are ignored."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"Unknown config fields: {sorted(unknown)}")
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        d["recall"] = self.recall.to_dict()
        d["grid"] = self.grid.to_dict() if self.grid is not None else None
        return d

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        try:
            if isinstance(data.get("recall"), dict):
                data["recall"] = RecallConfig.from_dict(data["recall"])
            if isinstance(data.get("grid"), dict):
                data["grid"] = GridSpec.from_dict(data["grid"])
        except (DomainError, TypeError, KeyError) as e:
            raise ConfigError(f"Bad nested config: {e}") from e
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError("Config must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        """Load a config from a JSON file."""
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        return cls.from_json(text)
