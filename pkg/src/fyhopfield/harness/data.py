"""Pattern sources: IDX image files, flat float64 matrices, synthetic generators,
and the query corruptions used by the retrieval experiments."""

from __future__ import annotations

import logging
import math
import struct
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import CapacityError, DomainError, FormatError
from ..types import PatternMemory
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

IDX_UBYTE_3D = 0x00000803
_IDX_HEADER = struct.Struct(">IIII")
_FLAT_HEADER = struct.Struct("<QQ")

SYNTHETIC_KINDS = ("sphere", "gaussian", "orthogonal", "binary")
DEFAULT_MAX_TRIES = 1000


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def read_idx_images(path: str | Path) -> NDArray[np.uint8]:
    """Raw images of an unsigned-byte 3-D IDX file, shaped (count, rows, cols).

    Raises FormatError, with the byte offset of the problem, on a bad magic
    number, an empty dimension or a payload that does not match the header.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _IDX_HEADER.size:
        raise FormatError(
            f"IDX header needs {_IDX_HEADER.size} bytes, file has {len(raw)}", offset=len(raw)
        )
    magic, count, rows, cols = _IDX_HEADER.unpack_from(raw, 0)
    if magic != IDX_UBYTE_3D:
        raise FormatError(f"Bad IDX magic 0x{magic:08x}, expected 0x{IDX_UBYTE_3D:08x}", offset=0)
    for i, dim in enumerate((count, rows, cols)):
        if dim == 0:
            raise FormatError("IDX dimension is zero", offset=4 + 4 * i)

    expected = count * rows * cols
    payload = len(raw) - _IDX_HEADER.size
    if payload != expected:
        raise FormatError(
            f"IDX header promises {expected} pixel bytes, file has {payload}",
            offset=_IDX_HEADER.size + min(payload, expected),
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=_IDX_HEADER.size)
    return pixels.reshape(count, rows, cols)


def load_idx_images(path: str | Path) -> PatternMemory:
    """IDX images flattened row-major, pixels mapped linearly from [0, 255] to [−1, 1]."""
    images = read_idx_images(path)
    X = images.reshape(images.shape[0], -1).astype(np.float64) / 127.5 - 1.0
    logger.debug("loaded %d images of %d pixels from %s", X.shape[0], X.shape[1], path)
    return PatternMemory(X)


def load_flat_matrix(path: str | Path) -> PatternMemory:
    """Little-endian float64 matrix with a header of two u64 counts N, D."""
    raw = Path(path).read_bytes()
    if len(raw) < _FLAT_HEADER.size:
        raise FormatError("Flat matrix header is truncated", offset=len(raw))
    n, d = _FLAT_HEADER.unpack_from(raw, 0)
    if n == 0 or d == 0:
        raise FormatError(f"Flat matrix has an empty shape ({n}, {d})", offset=0)
    expected = 8 * n * d
    payload = len(raw) - _FLAT_HEADER.size
    if payload != expected:
        raise FormatError(
            f"Flat matrix header promises {expected} bytes of data, file has {payload}",
            offset=_FLAT_HEADER.size + min(payload, expected),
        )
    X = np.frombuffer(raw, dtype="<f8", offset=_FLAT_HEADER.size).reshape(n, d)
    return PatternMemory(X.astype(np.float64))


def write_flat_matrix(path: str | Path, X: ArrayLike) -> None:
    arr = np.asarray(X, dtype="<f8")
    if arr.ndim != 2:
        raise DomainError(f"Expected a matrix, got shape {arr.shape}")
    Path(path).write_bytes(_FLAT_HEADER.pack(*arr.shape) + arr.tobytes())


# ---------------------------------------------------------------------------
# Synthetic patterns
# ---------------------------------------------------------------------------


def _draw(kind: str, n: int, d: int, radius: float, rng: np.random.Generator) -> FloatArray:
    if kind == "sphere":
        X = rng.standard_normal((n, d))
        return radius * X / np.linalg.norm(X, axis=1, keepdims=True)
    if kind == "gaussian":
        return radius * rng.standard_normal((n, d))
    if kind == "binary":
        return radius * rng.choice([-1.0, 1.0], size=(n, d))
    if n > d:
        raise DomainError(f"Cannot place {n} orthogonal patterns in {d} dimensions")
    Q, _ = np.linalg.qr(rng.standard_normal((d, n)))
    return radius * Q.T


def _accepts(X: FloatArray, candidate: FloatArray, bound: float) -> bool:
    if X.shape[0] == 0:
        return True
    overlaps = X @ candidate
    own = np.einsum("ij,ij->i", X, X)
    own_candidate = float(candidate @ candidate)
    return bool(np.all(overlaps <= own - bound) and np.all(overlaps <= own_candidate - bound))


def synth_patterns(
    kind: str,
    n: int,
    d: int,
    radius: float = 1.0,
    min_separation: float | None = None,
    seed: int = 0,
    max_tries: int = DEFAULT_MAX_TRIES,
) -> PatternMemory:
    """Random patterns of the given kind.

    Kinds:
        sphere: uniform directions scaled to norm `radius`.
        gaussian: i.i.d. normal entries times `radius`.
        orthogonal: orthonormal rows times `radius` (needs n <= d).
        binary: random ±radius entries.

    With `min_separation`, patterns are drawn one at a time and a draw is kept
    only if every pairwise separation stays >= the bound; CapacityError is
    raised when a pattern needs more than `max_tries` draws.
    """
    if kind not in SYNTHETIC_KINDS:
        raise DomainError(f"Unknown synthetic kind '{kind}'; expected one of {SYNTHETIC_KINDS}")
    if n < 1 or d < 1:
        raise DomainError(f"Need n, d >= 1, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    if min_separation is None or kind == "orthogonal":
        X = _draw(kind, n, d, radius, rng)
        if kind == "orthogonal" and min_separation is not None and radius**2 < min_separation:
            raise CapacityError(f"Orthogonal patterns of radius {radius} separate by {radius**2}")
        return PatternMemory(X)

    rows = np.zeros((0, d))
    for i in range(n):
        for _ in range(max_tries):
            candidate = _draw(kind, 1, d, radius, rng)[0]
            if _accepts(rows, candidate, min_separation):
                rows = np.vstack([rows, candidate])
                break
        else:
            raise CapacityError(
                f"Could not place pattern {i + 1} of {n} with separation >= {min_separation} "
                f"in {max_tries} draws"
            )
    return PatternMemory(rows)


# ---------------------------------------------------------------------------
# Corruption
# ---------------------------------------------------------------------------


def corrupt(
    q: ArrayLike,
    mode: str,
    amount: float,
    rng: np.random.Generator | int | None = None,
) -> FloatArray:
    """A damaged copy of q.

    gaussian: add N(0, amount²) noise, then clip to [−1, 1].
    mask: zero a contiguous suffix covering `amount` of the entries; for
        row-major images that is a block of bottom rows.
    """
    x = np.asarray(q, dtype=np.float64)
    if mode == "gaussian":
        if amount < 0:
            raise DomainError(f"noise level must be non-negative, got {amount}")
        if amount == 0:
            return x.copy()
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        return np.clip(x + amount * gen.standard_normal(x.shape), -1.0, 1.0)
    if mode == "mask":
        if not 0.0 <= amount <= 1.0:
            raise DomainError(f"mask fraction must lie in [0, 1], got {amount}")
        out = x.copy()
        k = math.ceil(amount * x.size - 1e-9)
        if k:
            out[x.size - k:] = 0.0
        return out
    raise DomainError(f"Unknown corruption '{mode}'")


# ---------------------------------------------------------------------------
# Config-driven loading
# ---------------------------------------------------------------------------


def _subsample(mem: PatternMemory, n: int, seed: int) -> PatternMemory:
    if n >= mem.n_patterns:
        return mem
    rng = np.random.default_rng(seed)
    return mem.subset(np.sort(rng.choice(mem.n_patterns, size=n, replace=False)))


def _load_file(kind: str, path: str | Path) -> PatternMemory:
    return load_idx_images(path) if kind == "idx" else load_flat_matrix(path)


def load_dataset(cfg: ExperimentConfig, n: int, seed: int) -> PatternMemory:
    """The memory for one sweep cell: n patterns from the configured source.

    File datasets are subsampled with the cell seed. A missing file falls back
    to synthetic sphere patterns with a warning.
    """
    if cfg.dataset.startswith("synthetic-"):
        kind = cfg.dataset.removeprefix("synthetic-")
        return synth_patterns(kind, n, cfg.dim, cfg.radius, cfg.min_separation, seed)

    assert cfg.dataset_path is not None
    if not Path(cfg.dataset_path).exists():
        logger.warning("dataset %s not found; using synthetic sphere patterns", cfg.dataset_path)
        return synth_patterns("sphere", n, cfg.dim, cfg.radius, cfg.min_separation, seed)
    return _subsample(_load_file(cfg.dataset, cfg.dataset_path), n, seed)


def load_queries(cfg: ExperimentConfig, seed: int) -> PatternMemory | None:
    """Held-out queries from `query_path`, or None when queries come from the memory."""
    if cfg.query_path is None:
        return None
    if not Path(cfg.query_path).exists():
        logger.warning("query file %s not found; querying the memory instead", cfg.query_path)
        return None
    return _subsample(_load_file(cfg.dataset, cfg.query_path), cfg.n_queries, seed + 1)
