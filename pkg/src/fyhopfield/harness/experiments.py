"""Batch experiments: capacity and noise sweeps, metastable census, basins, recall.

Each sweep cell (parameter combination × seed) is an independent job run on
a bounded thread pool. Results are merged in sorted job order, so tables do
not depend on scheduling.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Any, TypeVar

import numpy as np
from numpy.typing import NDArray

from ..analysis import CensusReport, support_histogram
from ..dynamics import basin_grid, energy_grid, iterate, support_size
from ..errors import ConfigError
from ..recall import (
    free_recall_constrained,
    free_recall_penalized,
    levenshtein_coefficient,
    sequential_recall,
    successor_chain,
    unique_memory_ratio,
)
from ..types import (
    GridSpec,
    PatternMemory,
    RecallConfig,
    RecallTrace,
    SeparationKind,
    SeparationSpec,
)
from .config import ExperimentConfig
from .data import corrupt, load_dataset, load_queries
from .results import ResultTable

logger = logging.getLogger(__name__)

J = TypeVar("J")
R = TypeVar("R")


@dataclass(frozen=True, order=True)
class Job:
    """One sweep cell for one seed. `sep` and `post` index the config's spec lists."""

    n: int
    beta: float
    sep: int
    post: int
    noise: float
    seed: int


def run_jobs(fn: Callable[[J], R], jobs: Iterable[J], workers: int) -> dict[J, R]:
    """Run fn over jobs on a thread pool; the result dict is in sorted job order."""
    ordered = sorted(set(jobs))  # type: ignore[type-var]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {job: pool.submit(fn, job) for job in ordered}
        return {job: futures[job].result() for job in ordered}


def _cosine(a: NDArray[np.float64], b: NDArray[np.float64]) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


def _query_rng(job: Job) -> np.random.Generator:
    return np.random.default_rng([job.seed, job.n])


def _pick_targets(
    mem: PatternMemory, count: int, rng: np.random.Generator
) -> NDArray[np.int64]:
    return rng.choice(mem.n_patterns, size=min(count, mem.n_patterns), replace=False)


def _grouped(results: dict[Job, R], key: Callable[[Job], Any]) -> dict[Any, list[R]]:
    groups: dict[Any, list[R]] = {}
    for job, value in results.items():
        groups.setdefault(key(job), []).append(value)
    return groups


# ---------------------------------------------------------------------------
# Capacity and noise
# ---------------------------------------------------------------------------


def _retrieval_job(cfg: ExperimentConfig) -> Callable[[Job], float]:
    seps = cfg.separation_specs()
    posts = cfg.post_specs()

    def run(job: Job) -> float:
        mem = load_dataset(cfg, job.n, job.seed)
        sep = seps[job.sep].with_beta(job.beta)
        post = posts[job.post]
        rng = _query_rng(job)
        targets = _pick_targets(mem, cfg.n_queries, rng)
        hits = unconverged = 0
        for i in targets:
            q0 = corrupt(mem.X[i], cfg.corruption, job.noise, rng)
            trace = iterate(q0, mem, sep, post, cfg.max_iter)
            unconverged += not trace.converged
            hits += _cosine(trace.final, mem.X[i]) > cfg.match_threshold
        rate = hits / len(targets)
        if unconverged:
            logger.warning(
                "%s/%s N=%d seed=%d: %d of %d queries did not converge in %d steps",
                sep.label, post.label, job.n, job.seed, unconverged, len(targets), cfg.max_iter,
            )
        logger.info(
            "%s/%s N=%d beta=%g noise=%g seed=%d: success %.3f",
            sep.label, post.label, job.n, job.beta, job.noise, job.seed, rate,
        )
        return rate

    return run


def _retrieval_table(cfg: ExperimentConfig, noises: list[float]) -> ResultTable:
    seps = cfg.separation_specs()
    posts = cfg.post_specs()
    jobs = [
        Job(n, beta, s, p, noise, seed)
        for n, beta, s, p, noise, seed in product(
            cfg.n_memories, cfg.betas, range(len(seps)), range(len(posts)), noises, cfg.seeds
        )
    ]
    results = run_jobs(_retrieval_job(cfg), jobs, cfg.workers)
    table = ResultTable(key_names=["n", "beta", "separation", "post", "noise"])
    for (n, beta, s, p, noise), rates in _grouped(
        results, lambda j: (j.n, j.beta, j.sep, j.post, j.noise)
    ).items():
        keys = {
            "n": n, "beta": beta, "separation": seps[s].label, "post": posts[p].label,
            "noise": noise,
        }
        table.add(keys, "success_rate", rates)
    return table


def run_capacity(cfg: ExperimentConfig) -> ResultTable:
    """Retrieval success against memory size.

    Queries are damaged copies of stored patterns (the first noise level, or
    the mask fraction); a query succeeds when its limit has cosine similarity
    above the match threshold with its pattern.
    """
    amount = cfg.mask_fraction if cfg.corruption == "mask" else cfg.noise[0]
    return _retrieval_table(cfg, [amount])


def run_noise(cfg: ExperimentConfig) -> ResultTable:
    """Retrieval success against corruption level, one row per level."""
    return _retrieval_table(cfg, list(cfg.noise))


# ---------------------------------------------------------------------------
# Metastable census
# ---------------------------------------------------------------------------


def census(
    mem: PatternMemory,
    queries: NDArray[np.float64],
    sep: SeparationSpec,
    max_iter: int,
) -> CensusReport:
    """Support size of ŷ_Ω(βXq) after iterating each query with Ψ = ½‖·‖²."""
    report = CensusReport(label=sep.label, beta=sep.beta)
    for q0 in queries:
        trace = iterate(q0, mem, sep, max_iter=max_iter)
        report.unconverged += not trace.converged
        report.sizes.append(support_size(mem, sep, trace.final))
    return report


def run_metastable(cfg: ExperimentConfig) -> ResultTable:
    """Histogram of final support sizes (1..10 and 10+) in percent, per separation."""
    seps = cfg.separation_specs()
    amount = cfg.mask_fraction if cfg.corruption == "mask" else cfg.noise[0]

    def run(job: Job) -> CensusReport:
        mem = load_dataset(cfg, job.n, job.seed)
        held_out = load_queries(cfg, job.seed)
        if held_out is not None:
            queries = held_out.X
        else:
            rng = _query_rng(job)
            picks = _pick_targets(mem, cfg.n_queries, rng)
            queries = np.stack([corrupt(mem.X[i], cfg.corruption, amount, rng) for i in picks])
        report = census(mem, queries, seps[job.sep].with_beta(job.beta), cfg.max_iter)
        logger.info("census %s beta=%g N=%d seed=%d done", report.label, job.beta, job.n, job.seed)
        return report

    jobs = [
        Job(n, beta, s, 0, amount, seed)
        for n, beta, s, seed in product(cfg.n_memories, cfg.betas, range(len(seps)), cfg.seeds)
    ]
    results = run_jobs(run, jobs, cfg.workers)
    table = ResultTable(key_names=["n", "beta", "separation", "size"])
    for (n, beta, s), reports in _grouped(results, lambda j: (j.n, j.beta, j.sep)).items():
        per_seed = [support_histogram(r.sizes) for r in reports]
        for bucket in per_seed[0]:
            keys = {"n": n, "beta": beta, "separation": seps[s].label, "size": bucket}
            table.add(keys, "percent", [h[bucket] for h in per_seed])
    return table


# ---------------------------------------------------------------------------
# Basins
# ---------------------------------------------------------------------------


@dataclass
class BasinMaps:
    """Basin labels (and energies where defined) over one grid, keyed by run name."""

    grid: GridSpec
    labels: dict[str, NDArray[np.int64]] = field(default_factory=dict)
    energies: dict[str, NDArray[np.float64]] = field(default_factory=dict)


def _default_grid(mem: PatternMemory, points: int = 25) -> GridSpec:
    r = 1.5 * mem.max_norm
    return GridSpec(tuple([-r] * mem.dim), tuple([r] * mem.dim), points)


def run_basins(cfg: ExperimentConfig) -> BasinMaps:
    """Attraction basins of a 2-D or 3-D memory for every separation × post × β."""
    if cfg.dim not in (2, 3):
        raise ConfigError(f"basins need dim 2 or 3, got {cfg.dim}")
    mem = load_dataset(cfg, cfg.n_memories[0], cfg.seeds[0])
    grid = cfg.grid or _default_grid(mem)
    maps = BasinMaps(grid=grid)
    for sep_spec, post, beta in product(cfg.separation_specs(), cfg.post_specs(), cfg.betas):
        sep = sep_spec.with_beta(beta)
        name = f"{sep.label}/{post.label}/beta={beta:g}"
        maps.labels[name] = basin_grid(mem, sep, grid, post, max_iter=cfg.max_iter)
        if sep.is_probabilistic and post.has_quadratic_energy:
            maps.energies[name] = energy_grid(mem, sep, grid)
        logger.info("basins %s done", name)
    return maps


# ---------------------------------------------------------------------------
# Recall
# ---------------------------------------------------------------------------


def _inner_alpha(sep: SeparationSpec) -> float:
    if sep.kind == SeparationKind.SOFTMAX:
        return 1.0
    if sep.kind == SeparationKind.ENTMAX:
        assert sep.alpha is not None
        return sep.alpha
    raise ConfigError(f"recall needs softmax or entmax separations, got '{sep.label}'")


def run_recall(
    cfg: ExperimentConfig, traces: dict[str, RecallTrace] | None = None
) -> ResultTable:
    """Unique memory ratio (and, for sequential recall, Levenshtein coefficient).

    Every episode is cued with the first stored pattern. Constrained recall
    ignores the separation list. When `traces` is given it receives the
    episode of the first seed of every cell.
    """
    sequential = cfg.experiment == "seq-recall"
    constrained = not sequential and cfg.algorithm == "constrained"
    seps = cfg.separation_specs()
    sep_indices = [0] if constrained else list(range(len(seps)))
    if not constrained:
        for s in sep_indices:
            _inner_alpha(seps[s])

    def label(s: int) -> str:
        return "csparsemax" if constrained else seps[s].label

    def run(job: Job) -> tuple[dict[str, float], RecallTrace]:
        mem = load_dataset(cfg, job.n, job.seed)
        rc: RecallConfig = dataclasses.replace(
            cfg.recall, beta=job.beta, match_threshold=cfg.match_threshold
        )
        if not constrained:
            rc = dataclasses.replace(rc, alpha=_inner_alpha(seps[job.sep]))
        cue = mem.X[0]
        if sequential:
            trace = sequential_recall(mem, cue, rc)
        elif constrained:
            trace = free_recall_constrained(mem, cue, rc)
        else:
            trace = free_recall_penalized(mem, cue, rc)
        metrics = {"unique_ratio": unique_memory_ratio(trace, mem)}
        if sequential and mem.n_patterns > 1:
            metrics["levenshtein"] = levenshtein_coefficient(
                trace.recalled_indices, successor_chain(mem.n_patterns)
            )
        logger.info(
            "%s %s N=%d beta=%g seed=%d: unique ratio %.3f",
            trace.algorithm, label(job.sep), job.n, job.beta, job.seed, metrics["unique_ratio"],
        )
        return metrics, trace

    jobs = [
        Job(n, beta, s, 0, 0.0, seed)
        for n, beta, s, seed in product(cfg.n_memories, cfg.betas, sep_indices, cfg.seeds)
    ]
    results = run_jobs(run, jobs, cfg.workers)
    table = ResultTable(key_names=["n", "beta", "separation"])
    for (n, beta, s), outcomes in _grouped(results, lambda j: (j.n, j.beta, j.sep)).items():
        keys = {"n": n, "beta": beta, "separation": label(s)}
        for metric in outcomes[0][0]:
            table.add(keys, metric, [m[metric] for m, _ in outcomes])
        if traces is not None:
            traces[f"{label(s)}/n={n}/beta={beta:g}"] = outcomes[0][1]
    return table
