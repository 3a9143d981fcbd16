"""Seeded sampling with reproducible parallel substreams.

Samples are split into fixed-size chunks.  Chunk ``i`` always draws from the
Philox stream spawned as child ``i`` of ``SeedSequence(seed)``, whichever worker
runs it, and per-chunk statistics are merged in chunk order.  Results are
therefore bit-identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DiscretePrior, DomainError, GammaParams, GammaProductPrior, PoissonChannel

MIN_ORACLE_SAMPLES = 1000


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class MonteCarloConfig:
    seed: int = 0
    samples: int = 100_000
    workers: int = 1
    chunk_size: int = 1 << 16

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.samples < 1:
            raise ConfigurationError("samples must be positive")
        if self.workers < 1:
            raise ConfigurationError("workers must be positive")
        if self.chunk_size < 1:
            raise ConfigurationError("chunk_size must be positive")

    def require_oracle_budget(self):
        if self.samples < MIN_ORACLE_SAMPLES:
            raise ConfigurationError(
                f"sample budget {self.samples} < {MIN_ORACLE_SAMPLES} required for oracle use"
            )

    def chunk_sizes(self) -> list[int]:
        full, rest = divmod(self.samples, self.chunk_size)
        return [self.chunk_size] * full + ([rest] if rest else [])


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for substream ``index`` of ``seed``."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return np.random.Generator(np.random.Philox(child))


def substreams(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def map_chunks(fn: Callable[[np.random.Generator, int], object], mc: MonteCarloConfig) -> list:
    """Run ``fn(rng, size)`` on every chunk; results come back in chunk order."""
    sizes = mc.chunk_sizes()
    rngs = substreams(mc.seed, len(sizes))
    if mc.workers == 1 or len(sizes) == 1:
        return [fn(rng, size) for rng, size in zip(rngs, sizes)]
    with ThreadPoolExecutor(max_workers=mc.workers) as pool:
        return list(pool.map(fn, rngs, sizes))


@dataclass
class RunningMoments:
    """Count, mean and centred sum of squares, merged pairwise (Chan et al.)."""

    count: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, values: np.ndarray) -> "RunningMoments":
        values = np.asarray(values, dtype=float)
        mean = values.mean(axis=0)
        return cls(values.shape[0], mean, ((values - mean) ** 2).sum(axis=0))

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return RunningMoments(n, mean, m2)

    @property
    def stderr(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.mean, np.inf)
        return np.sqrt(self.m2 / (self.count - 1) / self.count)


def mean_and_stderr(
    fn: Callable[[np.random.Generator, int], np.ndarray], mc: MonteCarloConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error of per-draw values returned by ``fn``."""
    parts = map_chunks(lambda rng, size: RunningMoments.of(fn(rng, size)), mc)
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total.mean, total.stderr


def sample_gamma(p: GammaParams, rng: np.random.Generator, size=None):
    return rng.gamma(p.shape, 1.0 / p.rate, size=size)


def sample_poisson(mean, rng: np.random.Generator, size=None):
    mean = np.asarray(mean, dtype=float)
    if np.any(mean < 0) or np.any(np.isnan(mean)):
        raise DomainError("Poisson mean must be >= 0")
    return rng.poisson(mean, size=size)


def sample_channel(channel: PoissonChannel, x, rng: np.random.Generator) -> np.ndarray:
    """Counts for one input vector, or for a batch of inputs given as rows of ``x``."""
    x = np.asarray(x, dtype=float)
    means = x @ channel.a_matrix.T + channel.dark_current
    if np.any(means < 0):
        raise DomainError("channel intensity A x + lambda has a negative entry")
    return rng.poisson(means)


def sample_prior(prior, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` draws of U as a (size, n) array."""
    if isinstance(prior, GammaProductPrior):
        return rng.gamma(prior.shape, 1.0 / prior.rate, size=(size, prior.dim))
    if isinstance(prior, DiscretePrior):
        idx = rng.choice(len(prior.weights), size=size, p=prior.weights)
        return prior.atoms[idx]
    raise TypeError(f"cannot sample from {type(prior).__name__}")
