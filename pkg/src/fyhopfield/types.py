"""Core data models: transform specs, pattern memories and iteration traces."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, FormatError
from .structures import KSubsets, SequentialKSubsets, Structure, structure_from_dict

FloatArray = NDArray[np.float64]


def _parse_params(parts: list[str]) -> dict[str, str]:
    params: dict[str, str] = {}
    for part in parts:
        if "=" not in part:
            raise DomainError(f"Expected key=value, got '{part}'")
        key, value = part.split("=", 1)
        params[key.strip()] = value.strip()
    return params


class NegentropyKind(str, Enum):
    """Generalized negentropies supported by the simplex transforms."""

    SHANNON = "shannon"
    TSALLIS = "tsallis"
    NORM = "norm"


@dataclass(frozen=True)
class NegentropySpec:
    """A generalized negentropy Ω together with its inverse temperature β.

    β always multiplies the scores before the transform, so the pair stands
    for ŷ_Ω(βθ) and never rescales Ω itself.
    """

    kind: NegentropyKind
    alpha: float | None = None
    gamma: float | None = None
    beta: float = 1.0

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.kind == NegentropyKind.TSALLIS and (self.alpha is None or self.alpha <= 1):
            raise DomainError(f"tsallis negentropy needs alpha > 1, got {self.alpha}")
        if self.kind == NegentropyKind.NORM and (self.gamma is None or self.gamma <= 1):
            raise DomainError(f"norm negentropy needs gamma > 1, got {self.gamma}")

    @classmethod
    def shannon(cls, beta: float = 1.0) -> NegentropySpec:
        return cls(NegentropyKind.SHANNON, beta=beta)

    @classmethod
    def tsallis(cls, alpha: float, beta: float = 1.0) -> NegentropySpec:
        """Tsallis α-negentropy; α = 1 is routed to Shannon."""
        if alpha == 1:
            return cls.shannon(beta)
        return cls(NegentropyKind.TSALLIS, alpha=alpha, beta=beta)

    @classmethod
    def gini(cls, beta: float = 1.0) -> NegentropySpec:
        return cls.tsallis(2.0, beta)

    @classmethod
    def norm(cls, gamma: float, beta: float = 1.0) -> NegentropySpec:
        return cls(NegentropyKind.NORM, gamma=gamma, beta=beta)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value, "alpha": self.alpha, "gamma": self.gamma, "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NegentropySpec:
        kind = data["kind"]
        beta = float(data.get("beta", 1.0))
        if kind == "gini":
            return cls.gini(beta)
        if kind == NegentropyKind.TSALLIS.value:
            return cls.tsallis(float(data["alpha"]), beta)
        if kind == NegentropyKind.NORM.value:
            return cls.norm(float(data["gamma"]), beta)
        if kind == NegentropyKind.SHANNON.value:
            return cls.shannon(beta)
        raise DomainError(f"Unknown negentropy kind '{kind}'")


# ---------------------------------------------------------------------------
# Separation and post-transformation specs
# ---------------------------------------------------------------------------


class SeparationKind(str, Enum):
    """Separation functions ŷ_Ω: one row per update rule in the catalogue."""

    IDENTITY = "identity"
    SPOW = "spow"
    EXP = "exp"
    SOFTMAX = "softmax"
    ENTMAX = "entmax"
    NORMMAX = "normmax"
    SPARSEMAP = "sparsemap"


_PROBABILISTIC = {SeparationKind.SOFTMAX, SeparationKind.ENTMAX, SeparationKind.NORMMAX}


@dataclass(frozen=True)
class SeparationSpec:
    """The separation step of the Hopfield update, applied to βθ.

    Usage:
        SeparationSpec.parse("entmax:alpha=1.5,beta=2")
        SeparationSpec.parse("sparsemap:ksubsets:n=10,k=2")
    """

    kind: SeparationKind
    beta: float = 1.0
    r: float | None = None
    alpha: float | None = None
    gamma: float | None = None
    structure: Structure | None = None

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.kind == SeparationKind.SPOW and (self.r is None or self.r < 2):
            raise DomainError(f"spow separation needs r >= 2, got {self.r}")
        if self.kind == SeparationKind.ENTMAX and (self.alpha is None or self.alpha < 1):
            raise DomainError(f"entmax separation needs alpha >= 1, got {self.alpha}")
        if self.kind == SeparationKind.NORMMAX and (self.gamma is None or self.gamma <= 1):
            raise DomainError(f"normmax separation needs gamma > 1, got {self.gamma}")
        if self.kind == SeparationKind.SPARSEMAP and self.structure is None:
            raise DomainError("sparsemap separation needs a structure")

    @property
    def is_probabilistic(self) -> bool:
        return self.kind in _PROBABILISTIC

    @property
    def negentropy(self) -> NegentropySpec:
        """The negentropy behind a probabilistic separation."""
        if self.kind == SeparationKind.SOFTMAX:
            return NegentropySpec.shannon(self.beta)
        if self.kind == SeparationKind.ENTMAX:
            assert self.alpha is not None
            return NegentropySpec.tsallis(self.alpha, self.beta)
        if self.kind == SeparationKind.NORMMAX:
            assert self.gamma is not None
            return NegentropySpec.norm(self.gamma, self.beta)
        raise DomainError(f"'{self.kind.value}' separation has no negentropy")

    @property
    def label(self) -> str:
        """Short human-readable name used in result tables."""
        if self.kind == SeparationKind.ENTMAX:
            return f"entmax{self.alpha:g}"
        if self.kind == SeparationKind.NORMMAX:
            return f"normmax{self.gamma:g}"
        if self.kind == SeparationKind.SPOW:
            return f"spow{self.r:g}"
        if self.kind == SeparationKind.SPARSEMAP:
            assert self.structure is not None
            return f"sparsemap-{self.structure.label}"
        return self.kind.value

    def with_beta(self, beta: float) -> SeparationSpec:
        return SeparationSpec(
            self.kind, beta=beta, r=self.r, alpha=self.alpha, gamma=self.gamma,
            structure=self.structure,
        )

    def with_structure_size(self, n: int) -> SeparationSpec:
        """Resize a structure to n memory slots (sweeps change N per cell)."""
        if self.structure is None or self.structure.n == n:
            return self
        return SeparationSpec(
            self.kind, beta=self.beta, structure=self.structure.resized(n),
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "beta": self.beta}
        for key in ("r", "alpha", "gamma"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        if self.structure is not None:
            d["structure"] = self.structure.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SeparationSpec:
        data = data.copy()
        kind = SeparationKind(data.pop("kind"))
        structure = data.pop("structure", None)
        return cls(
            kind,
            structure=structure_from_dict(structure) if structure is not None else None,
            **{k: float(v) for k, v in data.items()},
        )

    @classmethod
    def parse(cls, text: str) -> SeparationSpec:
        """Parse the compact form `kind[:key=value,...]`.

        The sparsemap kind takes the structure name as a second field:
        `sparsemap:ksubsets:k=2` or `sparsemap:seqksubsets:k=2,t=1e5`.
        The structure size n defaults to 1 and is resized to the memory.
        """
        head, _, rest = text.strip().partition(":")
        try:
            kind = SeparationKind(head)
        except ValueError as e:
            raise DomainError(f"Unknown separation kind '{head}'") from e

        if kind == SeparationKind.SPARSEMAP:
            name, _, rest = rest.partition(":")
            params = _parse_params([p for p in rest.split(",") if p])
            beta = float(params.pop("beta", 1.0))
            n = int(params.pop("n", 1))
            k = int(params.pop("k", 1))
            if name == "ksubsets":
                structure: Structure = KSubsets(max(n, k), k)
            elif name == "seqksubsets":
                structure = SequentialKSubsets(max(n, k), k, float(params.pop("t", 1.0)))
            else:
                raise DomainError(f"Unknown structure '{name}'")
            if params:
                raise DomainError(f"Unexpected parameters {sorted(params)} for '{text}'")
            return cls(kind, beta=beta, structure=structure)

        params = _parse_params([p for p in rest.split(",") if p])
        try:
            return cls(kind, **{k: float(v) for k, v in params.items()})
        except TypeError as e:
            raise DomainError(f"Bad parameters for '{text}': {e}") from e


class PostKind(str, Enum):
    """Post-transformations ŷ_Ψ applied after the pattern read-out."""

    IDENTITY = "identity"
    L2NORM = "l2norm"
    LAYERNORM = "layernorm"
    TANH = "tanh"
    SIGN = "sign"
    LINEAR = "linear"


@dataclass(frozen=True)
class PostSpec:
    """The post-transformation step of the Hopfield update.

    `unbiased` switches layer normalization to the D−1 variance.
    `matrix` is the fixed symmetric positive-definite map of the linear kind.
    """

    kind: PostKind = PostKind.IDENTITY
    r: float = 1.0
    eta: float = 1.0
    delta: tuple[float, ...] | None = None
    eps: float = 1e-8
    unbiased: bool = False
    beta: float = 1.0
    matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.r <= 0 or self.eta <= 0 or self.beta <= 0:
            raise DomainError("post-transformation parameters r, eta and beta must be positive")
        if self.eps < 0:
            raise DomainError(f"eps must be non-negative, got {self.eps}")
        if self.kind == PostKind.LINEAR:
            if self.matrix is None:
                raise DomainError("linear post-transformation needs a matrix")
            A = np.asarray(self.matrix, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
                raise DomainError("linear post-transformation needs a symmetric square matrix")
            if np.linalg.eigvalsh(A).min() <= 0:
                raise DomainError("linear post-transformation needs a positive-definite matrix")

    @property
    def has_quadratic_energy(self) -> bool:
        """True when Ψ = ½‖·‖², the case where the energy is evaluated."""
        return self.kind == PostKind.IDENTITY

    @property
    def label(self) -> str:
        return self.kind.value

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.kind == PostKind.L2NORM:
            d["r"] = self.r
        elif self.kind == PostKind.LAYERNORM:
            d.update(eta=self.eta, eps=self.eps, unbiased=self.unbiased)
            if self.delta is not None:
                d["delta"] = list(self.delta)
        elif self.kind == PostKind.TANH:
            d["beta"] = self.beta
        elif self.kind == PostKind.LINEAR:
            assert self.matrix is not None
            d["matrix"] = [list(row) for row in self.matrix]
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PostSpec:
        data = data.copy()
        kind = PostKind(data.pop("kind", "identity"))
        if "delta" in data and data["delta"] is not None:
            data["delta"] = tuple(float(v) for v in data["delta"])
        if "matrix" in data and data["matrix"] is not None:
            data["matrix"] = tuple(tuple(float(v) for v in row) for row in data["matrix"])
        return cls(kind, **data)

    @classmethod
    def parse(cls, text: str) -> PostSpec:
        """Parse the compact form `kind[:key=value,...]`, e.g. `layernorm:eta=1,eps=0`."""
        head, _, rest = text.strip().partition(":")
        try:
            kind = PostKind(head)
        except ValueError as e:
            raise DomainError(f"Unknown post-transformation '{head}'") from e
        if kind == PostKind.LINEAR:
            raise DomainError("linear post-transformation needs a matrix; use a JSON config")
        params = _parse_params([p for p in rest.split(",") if p])
        kwargs: dict[str, Any] = {}
        for key, value in params.items():
            if key == "unbiased":
                kwargs[key] = value.lower() in ("1", "true", "yes")
            else:
                kwargs[key] = float(value)
        try:
            return cls(kind, **kwargs)
        except TypeError as e:
            raise DomainError(f"Bad parameters for '{text}': {e}") from e


# ---------------------------------------------------------------------------
# Pattern memory
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PatternMemory:
    """An immutable N×D matrix of stored patterns, one pattern per row.

    Row norms, the largest norm M and the pattern mean μ_X are computed once
    at construction.
    """

    X: FloatArray
    norms: FloatArray = field(init=False, repr=False)
    max_norm: float = field(init=False)
    mean: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=np.float64, copy=True)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DomainError(f"Pattern matrix must be N×D with N, D >= 1, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DomainError("Pattern matrix has non-finite entries")
        X.flags.writeable = False
        norms = np.linalg.norm(X, axis=1)
        norms.flags.writeable = False
        mean = X.mean(axis=0)
        mean.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "max_norm", float(norms.max()))
        object.__setattr__(self, "mean", mean)

    @property
    def n_patterns(self) -> int:
        return int(self.X.shape[0])

    @property
    def dim(self) -> int:
        return int(self.X.shape[1])

    def scores(self, q: ArrayLike) -> FloatArray:
        """Affinities θ = Xq between the query and every pattern."""
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.dim,):
            raise DomainError(f"Query has shape {q.shape}, expected ({self.dim},)")
        return self.X @ q

    def readout(self, weights: ArrayLike) -> FloatArray:
        """Pattern read-out Xᵀy."""
        return self.X.T @ np.asarray(weights, dtype=np.float64)

    def subset(self, indices: ArrayLike) -> PatternMemory:
        return PatternMemory(self.X[np.asarray(indices)])

    def __len__(self) -> int:
        return self.n_patterns


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


@dataclass
class IterationTrace:
    """The sequence of queries visited by a fixed-point iteration.

    `energies` is empty when the energy is not defined for the chosen
    separation/post-transformation pair.
    """

    queries: list[FloatArray] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    converged: bool = False
    steps: int = 0

    @property
    def final(self) -> FloatArray:
        return self.queries[-1]

    @property
    def has_energy(self) -> bool:
        return len(self.energies) > 0

    @property
    def csv_columns(self) -> list[str]:
        dim = self.queries[0].size if self.queries else 0
        return ["step", "energy", *(f"q_{i}" for i in range(dim))]

    def csv_rows(self) -> Iterator[list[Any]]:
        """One row per visited query: step, energy (blank if undefined), q_0..q_{D-1}."""
        for i, q in enumerate(self.queries):
            energy = self.energies[i] if i < len(self.energies) else ""
            yield [i, energy, *(float(v) for v in q)]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.csv_columns)
            writer.writerows(self.csv_rows())

    @classmethod
    def from_csv(cls, path: str | Path) -> IterationTrace:
        """Read a trace written by `to_csv`.

        The file does not record convergence, so `converged` comes back False
        and `steps` is the number of updates it holds.
        """
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or header[:2] != ["step", "energy"]:
                raise FormatError(f"{path} does not start with columns step, energy")
            dim = len(header) - 2
            if header[2:] != [f"q_{i}" for i in range(dim)]:
                raise FormatError(f"{path}: query columns must be q_0..q_{dim - 1}")
            trace = cls()
            for line, record in enumerate(reader, start=2):
                if len(record) != len(header):
                    raise FormatError(
                        f"{path} line {line}: {len(record)} fields, expected {len(header)}"
                    )
                if record[1]:
                    if len(trace.energies) != len(trace.queries):
                        raise FormatError(f"{path} line {line}: energy after a blank energy")
                    trace.energies.append(float(record[1]))
                trace.queries.append(np.array([float(v) for v in record[2:]], dtype=np.float64))
        trace.steps = max(len(trace.queries) - 1, 0)
        return trace

    def to_dict(self) -> dict[str, Any]:
        return {
            "queries": [q.tolist() for q in self.queries],
            "energies": list(self.energies),
            "converged": self.converged,
            "steps": self.steps,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> IterationTrace:
        return cls(
            queries=[np.asarray(q, dtype=np.float64) for q in data.get("queries", [])],
            energies=[float(e) for e in data.get("energies", [])],
            converged=bool(data.get("converged", False)),
            steps=int(data.get("steps", 0)),
        )

    def __len__(self) -> int:
        return len(self.queries)


@dataclass
class RecallStep:
    """One outer step of a recall episode."""

    step: int
    distribution: list[float]
    matched: int | None
    similarity: float
    query: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "distribution": self.distribution,
            "matched": self.matched,
            "similarity": self.similarity,
            "query": self.query,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RecallStep:
        return cls(**data)


@dataclass
class RecallTrace:
    """A complete recall episode: the ordered outer steps and what each recalled.

    Matched indices are 1-based pattern numbers; None marks a step whose query
    is not close enough to any stored pattern.
    """

    algorithm: str = ""
    steps: list[RecallStep] = field(default_factory=list)
    exhausted: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def recalled(self) -> list[int | None]:
        return [s.matched for s in self.steps]

    @property
    def recalled_indices(self) -> list[int]:
        """Matched indices with unmatched steps dropped."""
        return [s.matched for s in self.steps if s.matched is not None]

    def add_step(self, step: RecallStep) -> None:
        self.steps.append(step)

    CSV_COLUMNS = ("step", "matched", "similarity")

    def csv_rows(self) -> Iterator[list[Any]]:
        for s in self.steps:
            yield [s.step, "" if s.matched is None else s.matched, s.similarity]

    def to_csv(self, path: str | Path) -> None:
        """Compact plotting form: step, matched (blank when unmatched), similarity."""
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(self.CSV_COLUMNS)
            writer.writerows(self.csv_rows())

    def to_dict(self) -> dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "exhausted": self.exhausted,
            "metadata": self.metadata,
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path: str | Path) -> None:
        """Save trace to a JSON file."""
        Path(path).write_text(self.to_json())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RecallTrace:
        data = data.copy()
        steps = [RecallStep.from_dict(s) for s in data.pop("steps", [])]
        return cls(steps=steps, **data)

    @classmethod
    def from_json(cls, json_str: str) -> RecallTrace:
        return cls.from_dict(json.loads(json_str))

    @classmethod
    def from_file(cls, path: str | Path) -> RecallTrace:
        """Load a trace from a JSON file."""
        return cls.from_json(Path(path).read_text())

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, index: int) -> RecallStep:
        return self.steps[index]

    def __iter__(self) -> Iterator[RecallStep]:
        return iter(self.steps)


# ---------------------------------------------------------------------------
# Recall and grid configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecallConfig:
    """Parameters shared by the recall simulators.

    Constrained recall reads beta and inner_steps; the penalized
    algorithm adds penalty, decay and alpha; sequential recall adds boost and
    transition.
    """

    beta: float = 0.1
    inner_steps: int = 20
    penalty: float = 1e9
    decay: float = 0.001
    alpha: float = 2.0
    boost: float = 1.1
    transition: float = 1e5
    match_threshold: float = 0.9
    inner_beta: bool = False

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.inner_steps < 1:
            raise DomainError(f"inner_steps must be >= 1, got {self.inner_steps}")
        if self.penalty < 0:
            raise DomainError(f"penalty must be non-negative, got {self.penalty}")
        if not 0 < self.decay <= 1:
            raise DomainError(f"decay must lie in (0, 1], got {self.decay}")
        if self.alpha < 1:
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")
        if self.boost < 1:
            raise DomainError(f"boost must be >= 1, got {self.boost}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "beta": self.beta,
            "inner_steps": self.inner_steps,
            "penalty": self.penalty,
            "decay": self.decay,
            "alpha": self.alpha,
            "boost": self.boost,
            "transition": self.transition,
            "match_threshold": self.match_threshold,
            "inner_beta": self.inner_beta,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RecallConfig:
        return cls(**data)


@dataclass(frozen=True)
class GridSpec:
    """A regular grid of queries over a 2-D or 3-D box."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    points: int = 50

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper) or len(self.lower) not in (2, 3):
            raise DomainError("Grid bounds must both be 2-D or both be 3-D")
        if not all(np.isfinite(self.lower)) or not all(np.isfinite(self.upper)):
            raise DomainError("Grid bounds must be finite")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise DomainError("Each lower bound must be below its upper bound")
        if self.points < 2:
            raise DomainError(f"Grid needs at least 2 points per axis, got {self.points}")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def axes(self) -> list[FloatArray]:
        return [np.linspace(lo, hi, self.points) for lo, hi in zip(self.lower, self.upper)]

    def queries(self) -> FloatArray:
        """All grid points as rows, first axis varying slowest."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_dict(self) -> dict[str, Any]:
        return {"lower": list(self.lower), "upper": list(self.upper), "points": self.points}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GridSpec:
        return cls(tuple(data["lower"]), tuple(data["upper"]), int(data.get("points", 50)))
