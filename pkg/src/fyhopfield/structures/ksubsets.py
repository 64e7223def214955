"""k-subsets: every binary vector over n variables with exactly k ones."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DomainError
from .base import FloatArray, Structure, StructuredMarginals, Vertex


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise DomainError(f"subset size k must satisfy 1 <= k <= {n}, got {k}")


def map_ksubsets(theta: ArrayLike, k: int) -> NDArray[np.int64]:
    """Indicator of the k largest scores; ties go to the lower index."""
    scores = np.asarray(theta, dtype=np.float64)
    _check_k(scores.size, k)
    z = np.zeros(scores.size, dtype=np.int64)
    z[np.argsort(-scores, kind="stable")[:k]] = 1
    return z


def _capped_mass(sorted_scores: FloatArray, prefix: FloatArray, tau: FloatArray) -> FloatArray:
    """g(τ) = Σ_i clip(θ_i − τ, 0, 1), evaluated at every τ."""
    n = sorted_scores.size
    hi = np.searchsorted(sorted_scores, tau + 1.0, side="left")
    lo = np.searchsorted(sorted_scores, tau, side="right")
    lo = np.minimum(lo, hi)
    capped = n - hi
    return capped + (prefix[hi] - prefix[lo]) - (hi - lo) * tau


def project_capped_simplex(theta: ArrayLike, k: int) -> StructuredMarginals:
    """Euclidean projection onto {y ∈ [0,1]^N : Σy = k}.

    y_i = clip(θ_i − τ, 0, 1) where τ is found by scanning the sorted
    breakpoints {θ_i − 1, θ_i} of the piecewise-linear mass g(τ) and
    interpolating inside the segment that crosses k.
    """
    scores = np.asarray(theta, dtype=np.float64)
    if scores.ndim != 1 or not np.all(np.isfinite(scores)):
        raise DomainError("Scores must be a finite vector")
    n = scores.size
    _check_k(n, k)
    if k == n:
        return StructuredMarginals(unary=np.ones(n))

    sorted_scores = np.sort(scores)
    prefix = np.concatenate([[0.0], np.cumsum(sorted_scores)])
    breaks = np.sort(np.concatenate([sorted_scores - 1.0, sorted_scores]))
    mass = _capped_mass(sorted_scores, prefix, breaks)

    # mass is non-increasing along breaks, from n down to 0
    j = int(np.flatnonzero(mass >= k)[-1])
    if mass[j] == k:
        tau = float(breaks[j])
    else:
        slope = (mass[j] - mass[j + 1]) / (breaks[j + 1] - breaks[j])
        tau = float(breaks[j] + (mass[j] - k) / slope)
    return StructuredMarginals(unary=np.clip(scores - tau, 0.0, 1.0))


@dataclass(frozen=True)
class KSubsets(Structure):
    """Retrieve subsets of exactly k patterns; SparseMAP is the capped simplex."""

    n: int
    k: int

    def __post_init__(self) -> None:
        _check_k(self.n, self.k)

    @property
    def label(self) -> str:
        return f"ksubsets{self.k}"

    def map_oracle(self, unary_scores: ArrayLike) -> Vertex:
        return Vertex(tuple(int(b) for b in map_ksubsets(unary_scores, self.k)))

    def vertices(self) -> Iterator[Vertex]:
        for chosen in itertools.combinations(range(self.n), self.k):
            bits = [0] * self.n
            for i in chosen:
                bits[i] = 1
            yield Vertex(tuple(bits))

    def count_vertices(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def diameter_bound(self) -> float:
        return math.sqrt(2 * min(self.k, self.n - self.k))

    def project(self, unary_scores: ArrayLike) -> StructuredMarginals:
        return project_capped_simplex(unary_scores, self.k)

    def resized(self, n: int) -> KSubsets:
        return KSubsets(n, min(self.k, n))

    def to_dict(self) -> dict[str, Any]:
        return {"name": "ksubsets", "n": self.n, "k": self.k}
