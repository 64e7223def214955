"""Base interface for structured sets 𝒴 and their MAP oracles."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import CapacityError, DomainError

FloatArray = NDArray[np.float64]

DEFAULT_MAX_VERTICES = 200_000


@dataclass(frozen=True)
class Vertex:
    """A structure y ∈ 𝒴 as bit-vectors: unary (variable) part and factor part."""

    unary: tuple[int, ...]
    factor: tuple[int, ...] = ()

    @property
    def m(self) -> FloatArray:
        return np.asarray(self.unary, dtype=np.float64)

    @property
    def n(self) -> FloatArray:
        return np.asarray(self.factor, dtype=np.float64)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, bit in enumerate(self.unary) if bit)


@dataclass
class StructuredMarginals:
    """A point of the marginal polytope conv(𝒴).

    `unary` holds the variable marginals; `factor` the factor marginals when
    the structure has factors.
    """

    unary: FloatArray
    factor: FloatArray | None = None

    @property
    def support(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.unary > 0)

    @property
    def total(self) -> float:
        return float(self.unary.sum())


class Structure(ABC):
    """A structured set 𝒴 over n variables, reachable only through a MAP oracle.

    Subclass this to plug a new structure into SparseMAP. A subclass must
    provide the MAP oracle, a vertex enumerator (for small-instance checks),
    and its serialization. SparseMAP needs nothing else.

    Usage:
        class Chain(Structure):
            def map_oracle(self, unary_scores):
                ...  # return the highest-scoring Vertex
    """

    n: int

    @property
    @abstractmethod
    def label(self) -> str:
        """Short name used in result tables."""
        ...

    @property
    def factor_scores(self) -> FloatArray:
        """Fixed scores of the factor bits (empty when there are no factors)."""
        return np.zeros(0)

    @abstractmethod
    def map_oracle(self, unary_scores: ArrayLike) -> Vertex:
        """Return argmax_y over 𝒴 of sᵀy_V + ηᵀy_F for unary scores s."""
        ...

    def __call__(self, unary_scores: ArrayLike) -> Vertex:
        return self.map_oracle(unary_scores)

    def vertex_score(self, vertex: Vertex, unary_scores: ArrayLike) -> float:
        s = np.asarray(unary_scores, dtype=np.float64)
        score = float(vertex.m @ s)
        if vertex.factor:
            score += float(vertex.n @ self.factor_scores)
        return score

    @abstractmethod
    def vertices(self) -> Iterator[Vertex]:
        """Every vertex of 𝒴, in a deterministic order."""
        ...

    @abstractmethod
    def count_vertices(self) -> int: ...

    def enumerate_vertices(self, max_vertices: int = DEFAULT_MAX_VERTICES) -> list[Vertex]:
        """All vertices as a list; only for small instances."""
        count = self.count_vertices()
        if count > max_vertices:
            raise CapacityError(
                f"{self.label} has {count} vertices, more than the budget of {max_vertices}"
            )
        return list(self.vertices())

    @property
    @abstractmethod
    def diameter_bound(self) -> float:
        """Upper bound on max ‖y − y'‖ over pairs of vertices."""
        ...

    def project(self, unary_scores: ArrayLike) -> StructuredMarginals | None:
        """Closed-form SparseMAP when one exists; None sends callers to the active set."""
        return None

    @abstractmethod
    def resized(self, n: int) -> Structure:
        """The same structure over n variables."""
        ...

    @abstractmethod
    def to_dict(self) -> dict[str, Any]: ...


def structure_from_dict(data: dict[str, Any]) -> Structure:
    from .ksubsets import KSubsets
    from .sequential import SequentialKSubsets

    name = data.get("name")
    if name == "ksubsets":
        return KSubsets(int(data["n"]), int(data["k"]))
    if name == "seqksubsets":
        return SequentialKSubsets(int(data["n"]), int(data["k"]), float(data.get("t", 1.0)))
    raise DomainError(f"Unknown structure '{name}'")
