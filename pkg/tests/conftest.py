"""Shared test fixtures."""

import numpy as np
import pytest

from fyhopfield import PatternMemory
from fyhopfield.harness import synth_patterns


@pytest.fixture
def identity2() -> PatternMemory:
    """Two orthonormal patterns in the plane."""
    return PatternMemory(np.eye(2))


@pytest.fixture
def identity3() -> PatternMemory:
    return PatternMemory(np.eye(3))


@pytest.fixture
def sequence16() -> PatternMemory:
    """Sixteen standard basis patterns, stored in sequence order."""
    return PatternMemory(np.eye(16))


@pytest.fixture
def sphere64() -> PatternMemory:
    """64 random patterns of norm 16 in 256 dimensions."""
    return synth_patterns("sphere", 64, 256, radius=16.0, seed=0)


@pytest.fixture
def separated_memory() -> PatternMemory:
    """Eight orthonormal patterns in 16 dimensions: every separation equals 1."""
    return synth_patterns("orthogonal", 8, 16, radius=1.0, seed=3)
