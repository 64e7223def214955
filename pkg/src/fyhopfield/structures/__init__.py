"""Structured sets 𝒴 for SparseMAP, each reachable through a MAP oracle."""

from .base import Structure, StructuredMarginals, Vertex, structure_from_dict
from .ksubsets import KSubsets, map_ksubsets, project_capped_simplex
from .sequential import SequentialKSubsets, map_seq_ksubsets

__all__ = [
    "Structure",
    "StructuredMarginals",
    "Vertex",
    "structure_from_dict",
    "KSubsets",
    "map_ksubsets",
    "project_capped_simplex",
    "SequentialKSubsets",
    "map_seq_ksubsets",
]
