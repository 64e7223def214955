"""SparseMAP by the active-set method, plus the structured margin checks.

SparseMAP solves

    ŷ(θ) = argmax_{y ∈ conv(𝒴)} θᵀy_V + ηᵀy_F − ½‖y_V‖²

where only the unary part y_V is regularized. The active-set solver keeps a
small set of vertices with weights on the simplex, solves the restricted QP
over them in closed form, and asks the structure's MAP oracle for the most
violating vertex until none is left.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .structures import Structure, StructuredMarginals, Vertex
from .structures.base import DEFAULT_MAX_VERTICES
from .types import PatternMemory

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-9
_WEIGHT_EPS = 1e-14


@dataclass
class ActiveSetState:
    """Bookkeeping of one SparseMAP solve.

    `structures` and `weights` describe the returned point as a convex
    combination of vertices. `threshold` is the KKT multiplier of the weight
    simplex: at the optimum every active vertex has adjusted score equal to
    it and no vertex exceeds it. `objective` records ½‖y_V‖² − score after
    every weight update and never increases.
    """

    structures: list[Vertex] = field(default_factory=list)
    weights: FloatArray = field(default_factory=lambda: np.zeros(0))
    iteration: int = 0
    converged: bool = False
    threshold: float = 0.0
    objective: list[float] = field(default_factory=list)

    @property
    def n_active(self) -> int:
        return len(self.structures)

    @property
    def is_vertex(self) -> bool:
        """True when the solution is a single structure with weight 1."""
        return self.n_active == 1


def _solve_kkt(gram: FloatArray, scores: FloatArray) -> tuple[float, FloatArray]:
    """Minimize ½αᵀGα − sᵀα subject to 1ᵀα = 1, ignoring α ≥ 0."""
    j = scores.size
    system = np.zeros((j + 1, j + 1))
    system[0, 1:] = 1.0
    system[1:, 0] = 1.0
    system[1:, 1:] = gram
    rhs = np.concatenate([[1.0], scores])
    try:
        sol = scipy.linalg.solve(system, rhs, assume_a="sym")
    except (scipy.linalg.LinAlgError, ValueError):
        # affinely dependent vertices make the system singular but consistent
        sol = scipy.linalg.lstsq(system, rhs)[0]
    return float(sol[0]), np.asarray(sol[1:], dtype=np.float64)


def _objective(unary: FloatArray, weights: FloatArray, scores: FloatArray) -> float:
    return float(0.5 * unary @ unary - weights @ scores)


def _marginals(
    structure: Structure, active: list[Vertex], weights: FloatArray
) -> StructuredMarginals:
    M = np.stack([v.m for v in active])
    unary = weights @ M
    factor = None
    if structure.factor_scores.size:
        factor = weights @ np.stack([v.n for v in active])
    return StructuredMarginals(unary=unary, factor=factor)


def sparsemap(
    structure: Structure,
    theta: ArrayLike,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> tuple[StructuredMarginals, ActiveSetState]:
    """SparseMAP marginals of θ over conv(𝒴), using only the MAP oracle.

    Args:
        structure: The structured set, queried through `map_oracle`.
        theta: Unary scores, one per variable.
        max_iter: Budget of restricted-QP solves.
        tol: Convergence tolerance on the most violating vertex.

    Returns:
        The marginals and the solver state. When the budget runs out the last
        iterate is returned with `state.converged` False.
    """
    scores_v = np.asarray(theta, dtype=np.float64)
    if scores_v.shape != (structure.n,):
        raise DomainError(f"Scores have shape {scores_v.shape}, expected ({structure.n},)")
    if not np.all(np.isfinite(scores_v)):
        raise DomainError("Scores must be finite")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")

    first = structure.map_oracle(scores_v)
    active = [first]
    weights = np.ones(1)
    vertex_scores = np.array([structure.vertex_score(first, scores_v)])
    M = first.m[None, :]
    gram = M @ M.T

    state = ActiveSetState()
    state.objective.append(_objective(M[0], weights, vertex_scores))

    for it in range(1, max_iter + 1):
        state.iteration = it
        tau, target = _solve_kkt(gram, vertex_scores)
        state.threshold = tau

        if np.any(target < -_WEIGHT_EPS):
            # partial step toward the restricted optimum; drop the blocking vertex
            direction = target - weights
            shrinking = direction < 0
            ratios = np.full(weights.size, np.inf)
            ratios[shrinking] = weights[shrinking] / -direction[shrinking]
            blocking = int(np.argmin(ratios))
            step = min(1.0, float(ratios[blocking]))
            weights = weights + step * direction
            keep = np.ones(weights.size, dtype=bool)
            keep[blocking] = False
            logger.debug(
                "sparsemap iter %d: partial step %.3g, dropping vertex %d", it, step, blocking
            )
        else:
            weights = target
            keep = weights > _WEIGHT_EPS

        if not keep.all():
            active = [v for v, k in zip(active, keep) if k]
            weights = weights[keep]
            vertex_scores = vertex_scores[keep]
            M = M[keep]
            gram = gram[np.ix_(keep, keep)]
        weights = np.clip(weights, 0.0, None)
        weights = weights / weights.sum()

        unary = weights @ M
        state.objective.append(_objective(unary, weights, vertex_scores))
        if np.any(target < -_WEIGHT_EPS):
            continue

        candidate = structure.map_oracle(scores_v - unary)
        adjusted = structure.vertex_score(candidate, scores_v - unary)
        gap = tau - adjusted
        logger.debug("sparsemap iter %d: %d active, gap %.3g", it, len(active), gap)
        if gap >= -tol or candidate in active:
            state.converged = True
            break

        m_new = candidate.m
        cross = M @ m_new
        gram = np.block([[gram, cross[:, None]], [cross[None, :], np.array([[m_new @ m_new]])]])
        M = np.vstack([M, m_new])
        active.append(candidate)
        weights = np.append(weights, 0.0)
        vertex_scores = np.append(vertex_scores, structure.vertex_score(candidate, scores_v))

    if not state.converged:
        logger.warning(
            "sparsemap on %s did not converge in %d iterations; returning last iterate",
            structure.label,
            max_iter,
        )

    state.structures = active
    state.weights = weights
    return _marginals(structure, active, weights), state


# ---------------------------------------------------------------------------
# Structured margin and separation
# ---------------------------------------------------------------------------


def structured_margin_satisfied(
    theta: ArrayLike,
    y: Vertex,
    structure: Structure,
    max_vertices: int = DEFAULT_MAX_VERTICES,
) -> bool:
    """Whether y beats every vertex y' by at least ½‖y_V − y'_V‖².

    The inequality is inclusive. Enumerates 𝒴, so only for small instances;
    raises CapacityError beyond `max_vertices`.
    """
    s = np.asarray(theta, dtype=np.float64)
    own = structure.vertex_score(y, s)
    m = y.m
    for other in structure.enumerate_vertices(max_vertices):
        diff = m - other.m
        if own < structure.vertex_score(other, s) + 0.5 * float(diff @ diff):
            return False
    return True


def structured_separation(mem: PatternMemory, vertices: list[Vertex]) -> FloatArray:
    """Δ_i = y_iᵀXXᵀy_i − max_{j≠i} y_iᵀXXᵀy_j for every listed vertex.

    Vertices index the memory rows, so each y_i selects an association of
    patterns whose sum is Xᵀy_i. A single vertex has infinite separation.
    """
    if not vertices:
        raise DomainError("Need at least one vertex")
    Y = np.stack([v.m for v in vertices])
    if Y.shape[1] != mem.n_patterns:
        raise DomainError(f"Vertices have {Y.shape[1]} variables, memory has {mem.n_patterns}")
    P = Y @ mem.X
    G = P @ P.T
    if len(vertices) == 1:
        return np.array([np.inf])
    off = G.copy()
    np.fill_diagonal(off, -np.inf)
    return np.diag(G) - off.max(axis=1)


def structured_retrieval_bound(
    beta: float, diameter: float, eps: float, sigma_max: float, max_norm: float
) -> float:
    """Separation needed for one-step retrieval of Xᵀy_i from any ε-close query.

    D²/(2β) + ε·min{σ_max(X)·D, M·D²}; with 𝒴 = △_N (D = √2) this is the
    sparsemax condition 1/β + 2Mε.
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    return diameter**2 / (2.0 * beta) + eps * min(sigma_max * diameter, max_norm * diameter**2)
