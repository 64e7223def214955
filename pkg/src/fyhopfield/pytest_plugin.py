"""pytest plugin for fyhopfield.

Auto-registered via pyproject.toml entry point.
Provides memory fixtures, a custom marker, and a summary of failed
Hopfield property checks.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

import numpy as np
import pytest

from .harness.data import synth_patterns
from .types import PatternMemory


def pytest_configure(config: Any) -> None:
    config.addinivalue_line(
        "markers",
        "fyhopfield: mark a test as a Hopfield memory property test",
    )


@pytest.fixture
def sphere_memory() -> Callable[..., PatternMemory]:
    """Fixture factory for random patterns on the sphere of radius M.

    Usage:
        def test_retrieval(sphere_memory):
            mem = sphere_memory(n=32, d=64, radius=1.0, seed=3)
            ...
    """

    def _make(
        n: int = 8,
        d: int = 16,
        radius: float = 1.0,
        seed: int = 0,
        min_separation: float | None = None,
    ) -> PatternMemory:
        return synth_patterns("sphere", n, d, radius, min_separation, seed)

    return _make


@pytest.fixture
def orthogonal_memory() -> Callable[..., PatternMemory]:
    """Fixture factory for orthonormal patterns scaled to norm M (needs n <= d).

    With `identity=True` the patterns are the first n standard basis vectors.
    """

    def _make(
        n: int = 8, d: int | None = None, radius: float = 1.0, seed: int = 0,
        identity: bool = False,
    ) -> PatternMemory:
        dim = n if d is None else d
        if identity:
            return PatternMemory(radius * np.eye(n, dim))
        return synth_patterns("orthogonal", n, dim, radius, seed=seed)

    return _make


@pytest.fixture
def rng() -> np.random.Generator:
    """A seeded generator, fresh for every test."""
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter: Any, exitstatus: int, config: Any) -> None:
    """Add a fyhopfield summary to pytest output."""
    reports = terminalreporter.getreports("failed")
    hopfield_failures = [
        report
        for report in reports
        if "HopfieldAssertionError" in getattr(report, "longreprtext", "")
    ]
    if hopfield_failures:
        terminalreporter.write_sep("=", "fyhopfield Failures")
        terminalreporter.write_line(
            f"{len(hopfield_failures)} Hopfield property check(s) failed"
        )
