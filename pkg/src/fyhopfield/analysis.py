"""Reports over many Hopfield runs: retrieval checks and metastable censuses.

Each report is a plain dataclass with a readable `__str__`, so it can be
printed from the CLI or attached to a failing test.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from .errors import DomainError


def support_histogram(sizes: Iterable[int], max_size: int = 10) -> dict[str, float]:
    """Percentage of runs per support size: "1".."max_size", then an overflow bucket.

    Every bucket is present, so rows of different runs line up; the values sum
    to 100 whenever at least one size is given.
    """
    counts = {str(s): 0 for s in range(1, max_size + 1)}
    overflow = f"{max_size}+"
    counts[overflow] = 0
    total = 0
    for size in sizes:
        if size < 1:
            raise DomainError(f"Support size must be >= 1, got {size}")
        counts[str(size) if size <= max_size else overflow] += 1
        total += 1
    if total == 0:
        return {key: 0.0 for key in counts}
    return {key: 100.0 * count / total for key, count in counts.items()}


@dataclass
class RetrievalFailure:
    """A perturbed query that did not land exactly on its pattern."""

    pattern: int
    trial: int
    error: float


@dataclass
class RetrievalReport:
    """Outcome of one-step exact retrieval from ε-perturbed patterns."""

    label: str
    beta: float
    eps: float
    margin: float
    required_separation: float
    guaranteed: list[int] = field(default_factory=list)
    trials: int = 0
    successes: int = 0
    failures: list[RetrievalFailure] = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 1.0

    @property
    def all_retrieved(self) -> bool:
        return self.trials > 0 and self.successes == self.trials

    def __str__(self) -> str:
        lines = [f"Exact retrieval: {self.label} (beta={self.beta:g}, eps={self.eps:g})"]
        lines.append(
            f"Margin: {self.margin:g} | required separation: {self.required_separation:.6g}"
        )
        lines.append(f"Guaranteed patterns: {len(self.guaranteed)}")
        lines.append(f"Trials: {self.trials} | success rate: {self.success_rate:.3f}")
        lines.append("-" * 60)
        if not self.failures:
            lines.append("No failures.")
        else:
            for f in self.failures[:10]:
                lines.append(f"  pattern {f.pattern + 1}, trial {f.trial}: max error {f.error:.3g}")
            if len(self.failures) > 10:
                lines.append(f"  ... and {len(self.failures) - 10} more")
        return "\n".join(lines)


@dataclass
class CensusReport:
    """Distribution of support sizes of ŷ_Ω(βXq) at convergence."""

    label: str
    beta: float
    sizes: list[int] = field(default_factory=list)
    unconverged: int = 0
    max_size: int = 10

    @property
    def histogram(self) -> dict[str, float]:
        return support_histogram(self.sizes, self.max_size)

    def fraction_at(self, size: int) -> float:
        """Fraction of queries (in [0, 1]) whose final support has exactly this size."""
        if not self.sizes:
            return 0.0
        return sum(1 for s in self.sizes if s == size) / len(self.sizes)

    def __str__(self) -> str:
        lines = [f"Metastable census: {self.label} (beta={self.beta:g})"]
        lines.append(f"Queries: {len(self.sizes)} | unconverged: {self.unconverged}")
        lines.append("-" * 60)
        for bucket, pct in self.histogram.items():
            if pct > 0:
                lines.append(f"  {bucket:>4}: {pct:5.1f}%")
        return "\n".join(lines)
