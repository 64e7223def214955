"""Free and sequential memory-recall simulators and their metrics.

Each simulator runs N outer steps over an N-pattern memory, records what the
query settles on after the inner Hopfield loop, and returns a RecallTrace.
Simulations own all of their state (bounds u, running penalty a, query q).
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .sparsemap import sparsemap
from .structures import SequentialKSubsets
from .transforms import SUM_TOL, constrained_sparsemax, entmax
from .types import PatternMemory, RecallConfig, RecallStep, RecallTrace

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


def match_pattern(
    q: ArrayLike, mem: PatternMemory, threshold: float = 0.9
) -> tuple[int | None, float]:
    """1-based index of the pattern most cosine-similar to q, if above threshold.

    Returns the index (None when nothing clears the threshold or q = 0) and the
    best cosine similarity.
    """
    query = np.asarray(q, dtype=np.float64)
    qn = float(np.linalg.norm(query))
    if qn == 0.0:
        return None, 0.0
    norms = np.where(mem.norms > 0, mem.norms, np.inf)
    cos = (mem.X @ query) / (norms * qn)
    best = int(np.argmax(cos))
    sim = float(cos[best])
    return (best + 1 if sim > threshold else None), sim


def ewma_update(average: FloatArray, p: FloatArray, decay: float) -> FloatArray:
    """One step of the exponentially weighted average: τp + (1 − τ)a."""
    return decay * p + (1.0 - decay) * average


def ewma_closed_form(history: Sequence[ArrayLike], decay: float) -> FloatArray:
    """a_t = Σ_{s≤t} τ(1 − τ)^{t−s} p_s, starting from a = 0."""
    if not history:
        raise DomainError("Need at least one vector")
    stacked = np.stack([np.asarray(p, dtype=np.float64) for p in history])
    t = stacked.shape[0]
    weights = decay * (1.0 - decay) ** np.arange(t - 1, -1, -1)
    return weights @ stacked


def _record(
    trace: RecallTrace, step: int, dist: FloatArray, q: FloatArray, mem: PatternMemory,
    cfg: RecallConfig,
) -> None:
    matched, sim = match_pattern(q, mem, cfg.match_threshold)
    trace.add_step(
        RecallStep(
            step=step,
            distribution=[float(v) for v in dist],
            matched=matched,
            similarity=sim,
            query=[float(v) for v in q],
        )
    )


def _start(mem: PatternMemory, q0: ArrayLike) -> FloatArray:
    q = np.asarray(q0, dtype=np.float64)
    if q.shape != (mem.dim,):
        raise DomainError(f"Cue has shape {q.shape}, expected ({mem.dim},)")
    return q.copy()


def free_recall_constrained(
    mem: PatternMemory, q0: ArrayLike, cfg: RecallConfig | None = None
) -> RecallTrace:
    """Free recall where constrained sparsemax caps the mass of attended patterns.

    Upper bounds start at 1; each outer step runs `inner_steps` updates
    p = csparsemax(βXq; u), q = Xᵀp and then spends u ← u − p. The bounds are
    clamped at 0. When they no longer admit a distribution (Σu < 1) the
    episode stops early and is flagged exhausted.
    """
    cfg = cfg or RecallConfig()
    q = _start(mem, q0)
    n = mem.n_patterns
    u = np.ones(n)
    trace = RecallTrace(algorithm="constrained", metadata={"config": cfg.to_dict(), "n": n})

    for step in range(1, n + 1):
        if u.sum() < 1.0 - SUM_TOL:
            trace.exhausted = True
            logger.warning("constrained recall exhausted its bounds after %d steps", step - 1)
            break
        p = np.zeros(n)
        for _ in range(cfg.inner_steps):
            p = constrained_sparsemax(cfg.beta * mem.scores(q), u)
            q = mem.readout(p)
        u = np.clip(u - p, 0.0, 1.0)
        _record(trace, step, p, q, mem, cfg)
    return trace


def free_recall_penalized(
    mem: PatternMemory, q0: ArrayLike, cfg: RecallConfig | None = None
) -> RecallTrace:
    """Free recall that penalizes a running average of attended patterns.

    Each outer step draws p = α-entmax(β(Xq − λa)), folds it into the average
    a ← τp + (1 − τ)a, moves to q = Xᵀp and then runs `inner_steps`
    unpenalized updates.
    """
    cfg = cfg or RecallConfig()
    q = _start(mem, q0)
    n = mem.n_patterns
    a = np.zeros(n)
    trace = RecallTrace(algorithm="penalized", metadata={"config": cfg.to_dict(), "n": n})

    for step in range(1, n + 1):
        p = entmax(cfg.beta * (mem.scores(q) - cfg.penalty * a), cfg.alpha)
        a = ewma_update(a, p, cfg.decay)
        q = mem.readout(p)
        for _ in range(cfg.inner_steps):
            p = entmax(cfg.beta * mem.scores(q), cfg.alpha)
            q = mem.readout(p)
        _record(trace, step, p, q, mem, cfg)
    return trace


def sequential_recall(
    mem: PatternMemory, q0: ArrayLike, cfg: RecallConfig | None = None
) -> RecallTrace:
    """Sequential recall of patterns stored in order, from a cue near the first.

    Each outer step takes the sequential 2-subsets SparseMAP marginals
    y of β(Xq − λa), which ideally pair the cue with its successor, moves to
    q = Xᵀy − q, settles with `inner_steps` α-entmax updates (β applied there
    only when `inner_beta` is set) and updates the penalty with y − ωp, so
    the consumed cue is penalized and the new pattern gets a small bonus.
    """
    cfg = cfg or RecallConfig()
    q = _start(mem, q0)
    n = mem.n_patterns
    if n < 2:
        raise DomainError("sequential recall needs at least 2 patterns")
    structure = SequentialKSubsets(n, 2, cfg.transition)
    inner_beta = cfg.beta if cfg.inner_beta else 1.0
    a = np.zeros(n)
    trace = RecallTrace(algorithm="sequential", metadata={"config": cfg.to_dict(), "n": n})

    for step in range(1, n + 1):
        marginals, state = sparsemap(structure, cfg.beta * (mem.scores(q) - cfg.penalty * a))
        if not state.converged:
            logger.warning("sequential recall step %d used an approximate SparseMAP", step)
        y = marginals.unary
        q = mem.readout(y) - q
        p = np.zeros(n)
        for _ in range(cfg.inner_steps):
            p = entmax(inner_beta * mem.scores(q), cfg.alpha)
            q = mem.readout(p)
        a = ewma_update(a, y - cfg.boost * p, cfg.decay)
        _record(trace, step, y, q, mem, cfg)
    return trace


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def unique_memory_ratio(
    trace: RecallTrace, mem: PatternMemory, match_threshold: float | None = None
) -> float:
    """Distinct recalled patterns over N.

    Uses the matches stored in the trace, or re-matches the recorded queries
    when a threshold is given.
    """
    if len(trace) == 0:
        raise DomainError("Recall trace is empty")
    if match_threshold is None:
        recalled = trace.recalled_indices
    else:
        recalled = []
        for s in trace:
            matched, _ = match_pattern(s.query, mem, match_threshold)
            if matched is not None:
                recalled.append(matched)
    return len(set(recalled)) / mem.n_patterns


def levenshtein_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Unit-cost insert/delete/substitute edit distance."""
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        curr = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            curr[j] = min(prev[j] + 1, curr[j - 1] + 1, prev[j - 1] + (x != y))
        prev = curr
    return prev[-1]


def levenshtein_coefficient(recalled: Sequence[int], reference: Sequence[int]) -> float:
    """1 − D/C for edit distance D to a reference of length C."""
    if len(reference) < 1:
        raise DomainError("Reference sequence must be non-empty")
    return 1.0 - levenshtein_distance(recalled, reference) / len(reference)


def successor_chain(n: int) -> list[int]:
    """Reference order for sequential recall cued with pattern 1: [2, …, N]."""
    return list(range(2, n + 1))
