"""Sequential k-subsets: k-subsets on a chain with a bonus t per adjacent on-on pair.

The factor graph is the chain V = {1..n}, F = {(i, i+1)}. Each pairwise factor
is encoded by the one-hot of its configuration (00, 01, 10, 11) and scored
[0, 0, 0, t], so the factor part of a vertex contributes t times the number
of adjacent selected pairs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import DomainError
from .base import FloatArray, Structure, Vertex


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise DomainError(f"subset size k must satisfy 1 <= k <= {n}, got {k}")


def map_seq_ksubsets(scores: ArrayLike, k: int, t: float) -> NDArray[np.int64]:
    """Exact maximizer of Σ_{i on} s_i + t·#(adjacent on-on pairs) over size-k subsets.

    Dynamic program over (position, ones still to place, previous bit), solved
    backwards and decoded forwards. On ties the earlier position is switched
    on, which yields the lexicographically earliest optimal subset.
    """
    s = np.asarray(scores, dtype=np.float64)
    n = s.size
    _check_k(n, k)

    # best[i, c, p]: best value of positions i..n-1 placing c ones, previous bit p
    best = np.full((n + 1, k + 1, 2), -np.inf)
    best[n, 0, :] = 0.0
    for i in range(n - 1, -1, -1):
        off = best[i + 1, :, 0]
        on = np.full(k + 1, -np.inf)
        on[1:] = best[i + 1, :-1, 1] + s[i]
        best[i, :, 0] = np.maximum(off, on)
        best[i, :, 1] = np.maximum(off, on + t)

    z = np.zeros(n, dtype=np.int64)
    remaining, prev = k, 0
    for i in range(n):
        if remaining == 0:
            break
        on_value = s[i] + t * prev + best[i + 1, remaining - 1, 1]
        off_value = best[i + 1, remaining, 0]
        if on_value >= off_value:
            z[i] = 1
            remaining -= 1
            prev = 1
        else:
            prev = 0
    return z


def pair_factor_bits(z: ArrayLike) -> tuple[int, ...]:
    """One-hot configuration of each adjacent pair, concatenated."""
    bits = np.asarray(z, dtype=np.int64)
    factor = np.zeros((max(bits.size - 1, 0), 4), dtype=np.int64)
    if bits.size > 1:
        factor[np.arange(bits.size - 1), 2 * bits[:-1] + bits[1:]] = 1
    return tuple(int(b) for b in factor.ravel())


@dataclass(frozen=True)
class SequentialKSubsets(Structure):
    """k-subsets with a transition score t rewarding consecutive selections."""

    n: int
    k: int
    t: float = 1.0

    def __post_init__(self) -> None:
        _check_k(self.n, self.k)

    @property
    def label(self) -> str:
        return f"seqksubsets{self.k}"

    @property
    def factor_scores(self) -> FloatArray:
        return np.tile([0.0, 0.0, 0.0, self.t], max(self.n - 1, 0))

    def _vertex(self, z: ArrayLike) -> Vertex:
        bits = tuple(int(b) for b in np.asarray(z))
        return Vertex(bits, pair_factor_bits(bits))

    def map_oracle(self, unary_scores: ArrayLike) -> Vertex:
        return self._vertex(map_seq_ksubsets(unary_scores, self.k, self.t))

    def vertices(self) -> Iterator[Vertex]:
        for chosen in itertools.combinations(range(self.n), self.k):
            bits = np.zeros(self.n, dtype=np.int64)
            bits[list(chosen)] = 1
            yield self._vertex(bits)

    def count_vertices(self) -> int:
        return math.comb(self.n, self.k)

    @property
    def diameter_bound(self) -> float:
        # two vertices differ in at most 2k variables, each touching 6 bits
        return math.sqrt(12 * self.k)

    def resized(self, n: int) -> SequentialKSubsets:
        return SequentialKSubsets(n, min(self.k, n), self.t)

    def to_dict(self) -> dict[str, Any]:
        return {"name": "seqksubsets", "n": self.n, "k": self.k, "t": self.t}
