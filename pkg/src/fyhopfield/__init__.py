"""fyhopfield - Sparse and structured Hopfield networks from Fenchel-Young losses.

Store patterns, retrieve them exactly.
"""

from .analysis import CensusReport, RetrievalFailure, RetrievalReport, support_histogram
from .assertions import (
    HopfieldAssertionError,
    converged,
    energy_bounds,
    energy_non_increasing,
    energy_within_bounds,
    is_one_hot,
    on_simplex,
    retrieved_exactly,
    support_equals,
    unique_ratio_at_least,
)
from .dynamics import (
    METASTABLE,
    basin_grid,
    energy_grid,
    exact_retrieval_check,
    hfy_energy,
    hopfield_update,
    iterate,
    pattern_separation,
    post_apply,
    separation_apply,
    spectral_norm,
    support_size,
    trajectory,
)
from .errors import CapacityError, ConfigError, DomainError, FormatError, HopfieldError
from .recall import (
    ewma_closed_form,
    ewma_update,
    free_recall_constrained,
    free_recall_penalized,
    levenshtein_coefficient,
    levenshtein_distance,
    match_pattern,
    sequential_recall,
    successor_chain,
    unique_memory_ratio,
)
from .sparsemap import (
    ActiveSetState,
    sparsemap,
    structured_margin_satisfied,
    structured_retrieval_bound,
    structured_separation,
)
from .structures import (
    KSubsets,
    SequentialKSubsets,
    Structure,
    StructuredMarginals,
    Vertex,
    map_ksubsets,
    map_seq_ksubsets,
    project_capped_simplex,
)
from .transforms import (
    conjugate_value,
    constrained_sparsemax,
    entmax,
    fy_loss,
    margin_of,
    negentropy_value,
    normmax,
    regularized_argmax,
    softmax,
    sparsemax,
    support_of,
)
from .types import (
    GridSpec,
    IterationTrace,
    NegentropyKind,
    NegentropySpec,
    PatternMemory,
    PostKind,
    PostSpec,
    RecallConfig,
    RecallStep,
    RecallTrace,
    SeparationKind,
    SeparationSpec,
)

__version__ = "0.1.0"

__all__ = [
    # Types
    "GridSpec",
    "IterationTrace",
    "NegentropyKind",
    "NegentropySpec",
    "PatternMemory",
    "PostKind",
    "PostSpec",
    "RecallConfig",
    "RecallStep",
    "RecallTrace",
    "SeparationKind",
    "SeparationSpec",
    # Errors
    "HopfieldError",
    "DomainError",
    "CapacityError",
    "FormatError",
    "ConfigError",
    # Transforms
    "softmax",
    "sparsemax",
    "entmax",
    "normmax",
    "constrained_sparsemax",
    "support_of",
    "regularized_argmax",
    "negentropy_value",
    "conjugate_value",
    "fy_loss",
    "margin_of",
    # Structures and SparseMAP
    "Structure",
    "StructuredMarginals",
    "Vertex",
    "KSubsets",
    "SequentialKSubsets",
    "map_ksubsets",
    "map_seq_ksubsets",
    "project_capped_simplex",
    "sparsemap",
    "ActiveSetState",
    "structured_margin_satisfied",
    "structured_separation",
    "structured_retrieval_bound",
    # Dynamics
    "METASTABLE",
    "separation_apply",
    "post_apply",
    "hopfield_update",
    "hfy_energy",
    "iterate",
    "trajectory",
    "energy_grid",
    "pattern_separation",
    "spectral_norm",
    "exact_retrieval_check",
    "basin_grid",
    "support_size",
    # Recall
    "match_pattern",
    "ewma_update",
    "ewma_closed_form",
    "free_recall_constrained",
    "free_recall_penalized",
    "sequential_recall",
    "unique_memory_ratio",
    "levenshtein_distance",
    "levenshtein_coefficient",
    "successor_chain",
    # Assertions
    "HopfieldAssertionError",
    "on_simplex",
    "support_equals",
    "is_one_hot",
    "retrieved_exactly",
    "converged",
    "energy_non_increasing",
    "energy_bounds",
    "energy_within_bounds",
    "unique_ratio_at_least",
    # Analysis
    "RetrievalFailure",
    "RetrievalReport",
    "CensusReport",
    "support_histogram",
]
