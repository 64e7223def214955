"""Probability-simplex transformations and their Fenchel-Young machinery.

Every transform here is a regularized argmax

    ŷ_Ω(θ) = argmax_{y ∈ △_N} θᵀy − Ω(y)

for a generalized negentropy Ω. Sparse transforms (sparsemax, entmax with
α > 1, normmax, constrained sparsemax) emit exact zeros off their support.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import xlogy

from .errors import DomainError
from .types import NegentropyKind, NegentropySpec

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

DEFAULT_BISECT_ITER = 50
SUM_TOL = 1e-12


def _as_scores(theta: ArrayLike) -> FloatArray:
    scores = np.asarray(theta, dtype=np.float64)
    if scores.ndim != 1 or scores.size < 1:
        raise DomainError(f"Scores must be a non-empty vector, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise DomainError("Scores must be finite")
    return scores


def _simplex_threshold(theta: FloatArray, mass: float) -> float:
    """Threshold τ with Σ (θ_i − τ)₊ = mass, by sort and cumulative sums.

    Ties are ordered by ascending index (stable sort on −θ).
    """
    order = np.argsort(-theta, kind="stable")
    z = theta[order]
    cssv = np.cumsum(z) - mass
    ind = np.arange(1, z.size + 1)
    rho = int(ind[z - cssv / ind > 0][-1])
    return float(cssv[rho - 1] / rho)


def _project_simplex(theta: FloatArray, mass: float = 1.0) -> FloatArray:
    """Euclidean projection onto {y ≥ 0, Σy = mass}."""
    if mass <= 0:
        return np.zeros_like(theta)
    tau = _simplex_threshold(theta, mass)
    return np.maximum(theta - tau, 0.0)


def support_of(y: ArrayLike, threshold: float = 0.0) -> NDArray[np.intp]:
    """Indices of the entries of y strictly above threshold."""
    return np.flatnonzero(np.asarray(y) > threshold)


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------


def softmax(theta: ArrayLike, beta: float = 1.0) -> FloatArray:
    """softmax(βθ), stabilized by subtracting the maximum score."""
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    z = beta * _as_scores(theta)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def sparsemax(theta: ArrayLike) -> FloatArray:
    """Euclidean projection of θ onto the probability simplex."""
    scores = _as_scores(theta)
    if scores.size == 1:
        return np.ones(1)
    return _project_simplex(scores, 1.0)


def entmax(
    theta: ArrayLike,
    alpha: float,
    n_iter: int = DEFAULT_BISECT_ITER,
    early_exit: bool = True,
) -> FloatArray:
    """α-entmax by bisection on the threshold τ.

    y_i = [(α−1)θ_i − τ]₊^{1/(α−1)}, with τ bracketed by
    [max − 1, max − N^{1−α}] on the (α−1)-scaled scores. The returned vector
    is renormalized so that it sums to 1.
    """
    if alpha < 1:
        raise DomainError(f"entmax needs alpha >= 1, got {alpha}")
    if alpha == 1:
        return softmax(theta, 1.0)
    scores = _as_scores(theta)
    n = scores.size
    if n == 1:
        return np.ones(1)

    x = (alpha - 1.0) * scores
    power = 1.0 / (alpha - 1.0)
    x_max = float(x.max())
    tau_lo = x_max - 1.0
    tau_hi = x_max - (1.0 / n) ** (alpha - 1.0)

    tau = tau_lo
    for _ in range(n_iter):
        tau = 0.5 * (tau_lo + tau_hi)
        total = float(np.sum(np.maximum(x - tau, 0.0) ** power))
        if total < 1.0:
            tau_hi = tau
        else:
            tau_lo = tau
        if early_exit and abs(total - 1.0) <= SUM_TOL:
            break

    y = np.maximum(x - tau, 0.0) ** power
    return y / y.sum()


def normmax(theta: ArrayLike, gamma: float, n_iter: int = DEFAULT_BISECT_ITER) -> FloatArray:
    """γ-normmax by bisection on μ.

    μ is bracketed by [θ_max − 1, θ_max − N^{1−γ}]; the bisection drives
    Z = Σ_j (θ_j − μ)₊^{γ/(γ−1)} to 1 and the result is
    y_i ∝ (θ_i − μ)₊^{1/(γ−1)}, normalized to sum 1.
    """
    if gamma <= 1:
        raise DomainError(f"normmax needs gamma > 1, got {gamma}")
    if n_iter < 1:
        raise DomainError(f"normmax needs at least one bisection step, got {n_iter}")
    scores = _as_scores(theta)
    n = scores.size
    if n == 1:
        return np.ones(1)

    theta_max = float(scores.max())
    mu_lo = theta_max - 1.0
    mu_hi = theta_max - float(n) ** (1.0 - gamma)
    z_power = gamma / (gamma - 1.0)

    mu = mu_lo
    for _ in range(n_iter):
        mu = 0.5 * (mu_lo + mu_hi)
        z = float(np.sum(np.maximum(scores - mu, 0.0) ** z_power))
        if z < 1.0:
            mu_hi = mu
        else:
            mu_lo = mu

    y = np.maximum(scores - mu, 0.0) ** (1.0 / (gamma - 1.0))
    return y / y.sum()


def constrained_sparsemax(theta: ArrayLike, upper: ArrayLike) -> FloatArray:
    """sparsemax restricted to {y ∈ △_N : y ≤ u}.

    Active set over the upper bounds: project onto the simplex, clamp every
    coordinate above its cap to the cap, re-project the free coordinates with
    the leftover mass, and repeat until nothing violates. The clamped set only
    grows, so this stops after at most N rounds.
    """
    scores = _as_scores(theta)
    u = np.asarray(upper, dtype=np.float64)
    if u.shape != scores.shape:
        raise DomainError(f"Upper bounds have shape {u.shape}, expected {scores.shape}")
    if np.any(u < 0) or not np.all(np.isfinite(u)):
        raise DomainError("Upper bounds must be finite and non-negative")
    if u.sum() < 1.0 - SUM_TOL:
        raise DomainError(f"Upper bounds sum to {u.sum():.6g} < 1; the feasible set is empty")
    if scores.size == 1:
        return np.ones(1)

    clamped = np.zeros(scores.size, dtype=bool)
    y = np.zeros_like(scores)
    for _ in range(scores.size + 1):
        free = ~clamped
        y[clamped] = u[clamped]
        if not free.any():
            break
        mass = 1.0 - float(u[clamped].sum())
        y[free] = _project_simplex(scores[free], mass)
        violators = free & (y > u)
        if not violators.any():
            break
        clamped |= violators
    return y


# ---------------------------------------------------------------------------
# Negentropies, conjugates and Fenchel-Young losses
# ---------------------------------------------------------------------------


def regularized_argmax(theta: ArrayLike, spec: NegentropySpec) -> FloatArray:
    """ŷ_Ω(βθ) for the negentropy and temperature in spec."""
    scores = _as_scores(theta)
    if spec.kind == NegentropyKind.SHANNON:
        return softmax(scores, spec.beta)
    if spec.kind == NegentropyKind.TSALLIS:
        assert spec.alpha is not None
        return entmax(spec.beta * scores, spec.alpha)
    assert spec.gamma is not None
    return normmax(spec.beta * scores, spec.gamma)


def negentropy_value(y: ArrayLike, spec: NegentropySpec) -> float:
    """Ω(y) for y on the simplex; zero at every vertex, negative elsewhere."""
    probs = np.asarray(y, dtype=np.float64)
    if spec.kind == NegentropyKind.SHANNON:
        return float(np.sum(xlogy(probs, probs)))
    if spec.kind == NegentropyKind.TSALLIS:
        assert spec.alpha is not None
        a = spec.alpha
        return float((np.sum(probs**a) - 1.0) / (a * (a - 1.0)))
    assert spec.gamma is not None
    return float(np.sum(probs**spec.gamma) ** (1.0 / spec.gamma) - 1.0)


def conjugate_value(theta: ArrayLike, spec: NegentropySpec) -> float:
    """Ω*(βθ) = βθᵀŷ − Ω(ŷ) with ŷ = ŷ_Ω(βθ)."""
    scores = spec.beta * _as_scores(theta)
    y = regularized_argmax(theta, spec)
    return float(scores @ y - negentropy_value(y, spec))


def fy_loss(theta: ArrayLike, y: ArrayLike, spec: NegentropySpec) -> float:
    """Fenchel-Young loss L_Ω(βθ; y) = Ω(y) + Ω*(βθ) − βθᵀy.

    Non-negative, and zero exactly when y = ŷ_Ω(βθ).
    """
    scores = _as_scores(theta)
    target = np.asarray(y, dtype=np.float64)
    if target.shape != scores.shape:
        raise DomainError(f"Target has shape {target.shape}, expected {scores.shape}")
    return float(
        negentropy_value(target, spec)
        + conjugate_value(scores, spec)
        - spec.beta * float(scores @ target)
    )


def margin_of(spec: NegentropySpec) -> float | None:
    """Margin of the Fenchel-Young loss, or None when it has none (Shannon)."""
    if spec.kind == NegentropyKind.TSALLIS:
        assert spec.alpha is not None
        return 1.0 / (spec.alpha - 1.0)
    if spec.kind == NegentropyKind.NORM:
        return 1.0
    return None
