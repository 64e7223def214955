"""Assertion library for Hopfield dynamics.

Every function raises HopfieldAssertionError (an AssertionError) with the
offending values attached, so the helpers read naturally inside pytest and
in harness self-checks.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from .transforms import negentropy_value
from .types import IterationTrace, PatternMemory, RecallTrace, SeparationSpec


class HopfieldAssertionError(AssertionError):
    """Assertion error carrying the value that failed the check."""

    def __init__(self, message: str, value: Any = None, trace: Any = None):
        self.value = value
        self.trace = trace
        super().__init__(message)


def _fmt(v: ArrayLike, limit: int = 8) -> str:
    arr = np.asarray(v, dtype=float).ravel()
    head = np.array2string(arr[:limit], precision=6, separator=", ")
    return head if arr.size <= limit else f"{head[:-1]}, ... ({arr.size} entries)]"


# ---------------------------------------------------------------------------
# Distribution assertions
# ---------------------------------------------------------------------------


def on_simplex(y: ArrayLike, tol: float = 1e-9) -> None:
    """Assert y is entrywise non-negative and sums to 1."""
    arr = np.asarray(y, dtype=float)
    if arr.size == 0 or np.any(arr < -tol) or abs(arr.sum() - 1.0) > tol:
        raise HopfieldAssertionError(
            f"Expected a point of the probability simplex.\n"
            f"Got {_fmt(arr)} with sum {arr.sum():.12g} and min {arr.min(initial=0.0):.3g}",
            value=arr,
        )


def support_equals(y: ArrayLike, expected: list[int]) -> None:
    """Assert the exact support (strictly positive entries) of y."""
    actual = [int(i) for i in np.flatnonzero(np.asarray(y) > 0)]
    if actual != sorted(expected):
        raise HopfieldAssertionError(
            f"Expected support {sorted(expected)}, got {actual}.\nValues: {_fmt(y)}",
            value=y,
        )


def is_one_hot(y: ArrayLike, index: int | None = None) -> None:
    """Assert y is exactly a vertex of the simplex (optionally a given one)."""
    arr = np.asarray(y, dtype=float)
    hot = np.flatnonzero(arr)
    if hot.size != 1 or arr[hot[0]] != 1.0:
        raise HopfieldAssertionError(
            f"Expected an exact one-hot vector, got {_fmt(arr)}", value=arr
        )
    if index is not None and int(hot[0]) != index:
        raise HopfieldAssertionError(
            f"Expected the one-hot at index {index}, got index {int(hot[0])}", value=arr
        )


# ---------------------------------------------------------------------------
# Retrieval assertions
# ---------------------------------------------------------------------------


def retrieved_exactly(q: ArrayLike, pattern: ArrayLike, tol: float = 1e-9) -> None:
    """Assert ‖q − pattern‖_∞ ≤ tol."""
    diff = np.asarray(q, dtype=float) - np.asarray(pattern, dtype=float)
    err = float(np.max(np.abs(diff)))
    if err > tol:
        raise HopfieldAssertionError(
            f"Expected exact retrieval within {tol:g}, max error was {err:.3g}.\n"
            f"Query:   {_fmt(q)}\nPattern: {_fmt(pattern)}",
            value=err,
        )


def converged(trace: IterationTrace) -> None:
    """Assert an iteration reached its fixed-point tolerance."""
    if not trace.converged:
        raise HopfieldAssertionError(
            f"Expected the iteration to converge, stopped after {trace.steps} steps",
            trace=trace,
        )


def energy_non_increasing(trace: IterationTrace, tol: float = 1e-9) -> None:
    """Assert the recorded energies never go up by more than tol."""
    if not trace.has_energy:
        raise HopfieldAssertionError("Trace has no recorded energies", trace=trace)
    energies = np.asarray(trace.energies)
    rises = np.flatnonzero(np.diff(energies) > tol)
    if rises.size:
        i = int(rises[0])
        raise HopfieldAssertionError(
            f"Energy increased at step {i + 1}: {energies[i]:.12g} -> {energies[i + 1]:.12g}",
            value=energies,
            trace=trace,
        )


def energy_bounds(mem: PatternMemory, sep: SeparationSpec) -> tuple[float, float]:
    """[0, min{2M², −β⁻¹Ω(1/N) + ½M²}]: the energy range over conv(rows of X)."""
    spec = sep.negentropy
    n = mem.n_patterns
    m2 = mem.max_norm**2
    omega = negentropy_value(np.full(n, 1.0 / n), spec)
    return 0.0, min(2.0 * m2, -omega / spec.beta + 0.5 * m2)


def energy_within_bounds(
    energy: float, mem: PatternMemory, sep: SeparationSpec, tol: float = 1e-9
) -> None:
    """Assert an energy value lies in the range of energy_bounds."""
    low, high = energy_bounds(mem, sep)
    if not low - tol <= energy <= high + tol:
        raise HopfieldAssertionError(
            f"Energy {energy:.12g} outside [{low:.6g}, {high:.6g}] for {sep.label}",
            value=energy,
        )


def unique_ratio_at_least(trace: RecallTrace, mem: PatternMemory, minimum: float) -> None:
    """Assert a recall episode recalled at least this fraction of distinct patterns."""
    recalled = trace.recalled_indices
    ratio = len(set(recalled)) / mem.n_patterns
    if ratio < minimum:
        raise HopfieldAssertionError(
            f"Expected a unique memory ratio >= {minimum:g}, got {ratio:.4g}.\n"
            f"Recalled: {trace.recalled}",
            value=ratio,
            trace=trace,
        )
