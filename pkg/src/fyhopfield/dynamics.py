"""HFY dynamics: update rules, energies and fixed-point iteration.

One update runs the pipeline

    q⁺ = ŷ_Ψ(Xᵀ ŷ_Ω(βXq))

in four stages: similarity (θ = Xq), separation (ŷ_Ω), projection (Xᵀ·) and
post-transformation (ŷ_Ψ). With Ψ = ½‖·‖² each update is one CCCP step on
the energy, so the energy never increases along an iteration.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .analysis import RetrievalFailure, RetrievalReport
from .errors import DomainError
from .sparsemap import sparsemap
from .transforms import entmax, fy_loss, margin_of, normmax, softmax
from .types import (
    GridSpec,
    IterationTrace,
    PatternMemory,
    PostKind,
    PostSpec,
    SeparationKind,
    SeparationSpec,
)

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_MAX_ITER = 1000
DEFAULT_TOL = 1e-8
EXACT_TOL = 1e-9
SOFTMAX_SUPPORT_THRESHOLD = 0.01
METASTABLE = 0


# ---------------------------------------------------------------------------
# Separation and post-transformation
# ---------------------------------------------------------------------------


def separation_apply(spec: SeparationSpec, theta: ArrayLike) -> FloatArray:
    """ŷ_Ω(βθ) for the separation in spec; for SparseMAP, the unary marginals."""
    scores = np.asarray(theta, dtype=np.float64)
    if scores.ndim != 1 or not np.all(np.isfinite(scores)):
        raise DomainError("Scores must be a finite vector")
    z = spec.beta * scores

    if spec.kind == SeparationKind.IDENTITY:
        return z
    if spec.kind == SeparationKind.SPOW:
        assert spec.r is not None
        return np.sign(z) * np.abs(z) ** (spec.r - 1.0)
    if spec.kind == SeparationKind.EXP:
        return np.exp(z)
    if spec.kind == SeparationKind.SOFTMAX:
        return softmax(scores, spec.beta)
    if spec.kind == SeparationKind.ENTMAX:
        assert spec.alpha is not None
        return entmax(z, spec.alpha)
    if spec.kind == SeparationKind.NORMMAX:
        assert spec.gamma is not None
        return normmax(z, spec.gamma)

    structure = spec.with_structure_size(scores.size).structure
    assert structure is not None
    fast = structure.project(z)
    if fast is not None:
        return fast.unary
    marginals, _ = sparsemap(structure, z)
    return marginals.unary


def post_apply(spec: PostSpec, z: ArrayLike) -> FloatArray:
    """ŷ_Ψ(z) for the post-transformation in spec."""
    v = np.asarray(z, dtype=np.float64)

    if spec.kind == PostKind.IDENTITY:
        return v.copy()
    if spec.kind == PostKind.L2NORM:
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise DomainError("l2norm post-transformation of the zero vector")
        return spec.r * v / norm
    if spec.kind == PostKind.LAYERNORM:
        return _layernorm(spec, v)
    if spec.kind == PostKind.TANH:
        return np.tanh(spec.beta * v)
    if spec.kind == PostKind.SIGN:
        return np.where(v >= 0, 1.0, -1.0)

    assert spec.matrix is not None
    A = np.asarray(spec.matrix, dtype=np.float64)
    if A.shape[1] != v.size:
        raise DomainError(f"Linear map is {A.shape}, vector has size {v.size}")
    return A @ v


def _layernorm(spec: PostSpec, v: FloatArray) -> FloatArray:
    d = v.size
    if spec.unbiased and d < 2:
        raise DomainError("unbiased layer normalization needs at least 2 entries")
    centered = v - v.mean()
    var = float(centered @ centered) / (d - 1 if spec.unbiased else d)
    if var + spec.eps <= 0.0:
        raise DomainError("layer normalization of a constant vector with eps = 0")
    out = spec.eta * centered / np.sqrt(var + spec.eps)
    if spec.delta is not None:
        delta = np.asarray(spec.delta, dtype=np.float64)
        if delta.shape != v.shape:
            raise DomainError(f"delta has shape {delta.shape}, expected {v.shape}")
        out = out + delta
    return out


# ---------------------------------------------------------------------------
# Update rule and energy
# ---------------------------------------------------------------------------


def hopfield_update(
    q: ArrayLike,
    mem: PatternMemory,
    sep: SeparationSpec,
    post: PostSpec | None = None,
) -> FloatArray:
    """One Hopfield update q ↦ ŷ_Ψ(Xᵀ ŷ_Ω(βXq))."""
    weights = separation_apply(sep, mem.scores(q))
    return post_apply(post or PostSpec(), mem.readout(weights))


def hfy_energy(
    q: ArrayLike,
    mem: PatternMemory,
    sep: SeparationSpec,
    beta: float | None = None,
) -> float:
    """Energy −β⁻¹L_Ω(βXq; 1/N) + ½‖q − μ_X‖² + ½(M² − ‖μ_X‖²).

    Defined for the probabilistic separations with Ψ = ½‖·‖². For q in the
    convex hull of the patterns it lies in [0, min{2M², −β⁻¹Ω(1/N) + ½M²}].
    """
    if not sep.is_probabilistic:
        raise DomainError(f"No energy is defined for '{sep.label}' separation")
    if beta is not None:
        sep = sep.with_beta(beta)
    spec = sep.negentropy
    query = np.asarray(q, dtype=np.float64)
    n = mem.n_patterns
    uniform = np.full(n, 1.0 / n)
    loss = fy_loss(mem.scores(query), uniform, spec)
    diff = query - mem.mean
    mu_sq = float(mem.mean @ mem.mean)
    return float(-loss / spec.beta + 0.5 * diff @ diff + 0.5 * (mem.max_norm**2 - mu_sq))


def _energy_defined(sep: SeparationSpec, post: PostSpec) -> bool:
    return sep.is_probabilistic and post.has_quadratic_energy


def iterate(
    q0: ArrayLike,
    mem: PatternMemory,
    sep: SeparationSpec,
    post: PostSpec | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> IterationTrace:
    """Apply the update until ‖q⁺ − q‖_∞ ≤ tol or max_iter updates.

    The energy is recorded at every visited query when it is defined for the
    chosen pair; otherwise `trace.energies` stays empty.
    """
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")
    post = post or PostSpec()
    with_energy = _energy_defined(sep, post)

    q = np.asarray(q0, dtype=np.float64).copy()
    trace = IterationTrace(queries=[q])
    if with_energy:
        trace.energies.append(hfy_energy(q, mem, sep))

    for step in range(1, max_iter + 1):
        q_next = hopfield_update(q, mem, sep, post)
        trace.queries.append(q_next)
        if with_energy:
            trace.energies.append(hfy_energy(q_next, mem, sep))
        trace.steps = step
        if float(np.max(np.abs(q_next - q))) <= tol:
            trace.converged = True
            logger.debug("%s converged after %d steps", sep.label, step)
            break
        q = q_next

    if not trace.converged:
        logger.debug("%s did not converge in %d steps", sep.label, max_iter)
    return trace


def trajectory(
    q0: ArrayLike,
    mem: PatternMemory,
    sep: SeparationSpec,
    post: PostSpec | None = None,
    max_iter: int = 50,
    tol: float = DEFAULT_TOL,
) -> FloatArray:
    """Visited queries stacked as rows, for plotting over energy contours."""
    return np.stack(iterate(q0, mem, sep, post, max_iter, tol).queries)


def energy_grid(mem: PatternMemory, sep: SeparationSpec, grid: GridSpec) -> FloatArray:
    """Energy at every grid point, shaped (points,) * grid.dim."""
    if mem.dim != grid.dim:
        raise DomainError(f"Grid is {grid.dim}-D, patterns are {mem.dim}-D")
    values = np.array([hfy_energy(q, mem, sep) for q in grid.queries()])
    return values.reshape((grid.points,) * grid.dim)


# ---------------------------------------------------------------------------
# Separation measures
# ---------------------------------------------------------------------------


def pattern_separation(mem: PatternMemory) -> FloatArray:
    """Δ_i = x_iᵀx_i − max_{j≠i} x_iᵀx_j for every pattern; +inf when N = 1."""
    if mem.n_patterns == 1:
        return np.array([np.inf])
    G = mem.X @ mem.X.T
    off = G.copy()
    np.fill_diagonal(off, -np.inf)
    return np.diag(G) - off.max(axis=1)


def spectral_norm(X: ArrayLike, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of X by power iteration on XᵀX."""
    A = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(A, axis=1)
    if not norms.any():
        return 0.0
    v = A[int(np.argmax(norms))].copy()
    v /= np.linalg.norm(v)
    sigma = float(np.linalg.norm(A @ v))
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        v = w / np.linalg.norm(w)
        updated = float(np.linalg.norm(A @ v))
        if abs(updated - sigma) <= tol * updated:
            return updated
        sigma = updated
    return sigma


# ---------------------------------------------------------------------------
# Retrieval, basins and support
# ---------------------------------------------------------------------------


def exact_retrieval_check(
    mem: PatternMemory,
    sep: SeparationSpec,
    eps: float,
    trials: int,
    seed: int = 0,
) -> RetrievalReport:
    """One update from q0 = x_i + ε·u (u a random unit vector) on guaranteed patterns.

    A pattern is guaranteed when Δ_i ≥ m/β + 2Mε for the separation's margin
    m; trials cycle through the guaranteed patterns in a seeded random order.
    A trial succeeds when ‖q⁺ − x_i‖_∞ ≤ 1e−9.
    """
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    if trials < 0:
        raise DomainError(f"trials must be non-negative, got {trials}")
    margin = margin_of(sep.negentropy) if sep.is_probabilistic else None
    if margin is None:
        raise DomainError(f"'{sep.label}' separation has no margin")

    required = margin / sep.beta + 2.0 * mem.max_norm * eps
    guaranteed = [int(i) for i in np.flatnonzero(pattern_separation(mem) >= required)]
    report = RetrievalReport(
        label=sep.label,
        beta=sep.beta,
        eps=eps,
        margin=margin,
        required_separation=required,
        guaranteed=guaranteed,
    )
    if not guaranteed:
        logger.warning("no pattern meets the separation %.6g; nothing to check", required)
        return report

    rng = np.random.default_rng(seed)
    order = rng.permutation(guaranteed)
    for trial in range(trials):
        i = int(order[trial % len(order)])
        u = rng.standard_normal(mem.dim)
        u /= np.linalg.norm(u)
        q1 = hopfield_update(mem.X[i] + eps * u, mem, sep)
        error = float(np.max(np.abs(q1 - mem.X[i])))
        report.trials += 1
        if error <= EXACT_TOL:
            report.successes += 1
        else:
            report.failures.append(RetrievalFailure(pattern=i, trial=trial, error=error))
    return report


def basin_grid(
    mem: PatternMemory,
    sep: SeparationSpec,
    grid: GridSpec,
    post: PostSpec | None = None,
    tolerance: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NDArray[np.int64]:
    """Label each grid query by the pattern its iteration converges to.

    Labels are 1-based pattern numbers; METASTABLE (0) marks queries whose
    limit is farther than `tolerance` from every pattern. The tolerance
    defaults to 0.01 for softmax and 1e-6 for the sparse separations.
    """
    if mem.dim != grid.dim:
        raise DomainError(f"Grid is {grid.dim}-D, patterns are {mem.dim}-D")
    if tolerance is None:
        sparse = sep.kind not in (SeparationKind.SOFTMAX, SeparationKind.EXP) and not (
            sep.kind == SeparationKind.ENTMAX and sep.alpha == 1
        )
        tolerance = 1e-6 if sparse else SOFTMAX_SUPPORT_THRESHOLD

    labels = np.full(grid.points**grid.dim, METASTABLE, dtype=np.int64)
    for cell, q0 in enumerate(grid.queries()):
        final = iterate(q0, mem, sep, post, max_iter).final
        dist = np.linalg.norm(mem.X - final, axis=1)
        nearest = int(np.argmin(dist))
        if dist[nearest] <= tolerance:
            labels[cell] = nearest + 1
    return labels.reshape((grid.points,) * grid.dim)


def support_size(
    mem: PatternMemory,
    sep: SeparationSpec,
    q: ArrayLike,
    threshold: float | None = None,
) -> int:
    """Number of patterns ŷ_Ω(βXq) puts weight on.

    Softmax never returns zeros, so it is thresholded at 0.01 unless told
    otherwise; the sparse separations use their exact support.
    """
    weights = separation_apply(sep, mem.scores(q))
    if threshold is None:
        dense = sep.kind == SeparationKind.SOFTMAX or (
            sep.kind == SeparationKind.ENTMAX and sep.alpha == 1
        )
        threshold = SOFTMAX_SUPPORT_THRESHOLD if dense else 0.0
    return int(np.count_nonzero(weights > threshold))
