"""Seeded random model generators shared by the property suites and sweep scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DiscretePrior, GammaProductPrior
from .gaussian import GaussianModel
from .montecarlo import substream
from .stability import moment_matched_gamma


@dataclass(frozen=True)
class PoissonTrial:
    seed: int
    prior: DiscretePrior | GammaProductPrior
    target: GammaProductPrior

    @property
    def kind(self) -> str:
        return "discrete" if isinstance(self.prior, DiscretePrior) else "gamma"


def poisson_trial(seed: int) -> PoissonTrial:
    """Odd seeds draw a discrete prior, even seeds a product gamma; target is moment-matched."""
    rng = substream(seed, 0)
    n = int(rng.integers(1, 3))
    if seed % 2:
        m = int(rng.integers(2, 6))
        atoms = rng.uniform(0.1, 5.0, size=(m, n))
        prior = DiscretePrior(atoms, rng.dirichlet(np.ones(m)))
    else:
        prior = GammaProductPrior.from_arrays(rng.uniform(0.5, 5.0, n), rng.uniform(0.2, 5.0, n))
    return PoissonTrial(seed, prior, moment_matched_gamma(prior))


def random_gamma(rng: np.random.Generator, n: int) -> GammaProductPrior:
    return GammaProductPrior.from_arrays(rng.uniform(0.5, 5.0, n), rng.uniform(0.2, 5.0, n))


def random_gaussian_model(rng: np.random.Generator) -> GaussianModel:
    n = int(rng.integers(1, 4))
    k = int(rng.integers(1, 4))
    root = rng.normal(size=(n, n))
    return GaussianModel(rng.normal(size=n), root @ root.T + 0.1 * np.eye(n), rng.normal(size=(k, n)))


@dataclass(frozen=True)
class GaussianTrial:
    seed: int
    prior: DiscretePrior
    a_matrix: np.ndarray

    @property
    def model(self) -> GaussianModel:
        return GaussianModel.moment_matched(self.prior, self.a_matrix)


def gaussian_trial(seed: int) -> GaussianTrial:
    """A non-Gaussian (finite-support, signed) input with a random mixing matrix."""
    rng = substream(seed, 1)
    n = int(rng.integers(1, 3))
    k = int(rng.integers(1, 3))
    m = int(rng.integers(2, 6))
    prior = DiscretePrior(rng.normal(size=(m, n)), rng.dirichlet(np.ones(m)), signed=True)
    return GaussianTrial(seed, prior, rng.normal(size=(k, n)))
