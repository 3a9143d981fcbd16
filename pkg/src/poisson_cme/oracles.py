"""Randomized cross-checks of the pmf identities against brute-force Bayes rule."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from .core import ConditioningOnNullEvent, DiscretePrior, LinearEstimator
from .empirical_bayes import (
    OutputPmf,
    cme_direct_discrete,
    cme_trg,
    cond_cov_trg,
    cov_direct_discrete,
    poisson_tail_cutoff,
)
from .montecarlo import substream
from .stability import laplace_residual

TOLERANCES = {"trg": 1e-11, "cov": 1e-10, "laplace-residual": 1e-10}
SUITES = tuple(TOLERANCES)


@dataclass
class SuiteResult:
    name: str
    trials: int
    max_discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_discrepancy < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: trials={self.trials} "
            f"max_discrepancy={self.max_discrepancy:.3e} tolerance={self.tolerance:.0e}"
        )


def random_discrete_prior(rng: np.random.Generator, max_atoms=5, max_dim=3, hi=8.0) -> DiscretePrior:
    m = int(rng.integers(1, max_atoms + 1))
    n = int(rng.integers(1, max_dim + 1))
    atoms = rng.uniform(0.0, hi, size=(m, n))
    return DiscretePrior(atoms, rng.dirichlet(np.ones(m)))


def _lattice(n: int, top: int = 5):
    return itertools.product(range(top + 1), repeat=n)


def trg_suite(trials: int, seed: int) -> SuiteResult:
    rng = substream(seed, 0)
    worst = 0.0
    for _ in range(trials):
        prior = random_discrete_prior(rng)
        pmf = OutputPmf.of_discrete(prior)
        for y in _lattice(prior.dim):
            try:
                diff = cme_trg(pmf, y) - cme_direct_discrete(prior, y)
            except ConditioningOnNullEvent:
                continue
            worst = max(worst, float(np.max(np.abs(diff))))
    return SuiteResult("trg", trials, worst, TOLERANCES["trg"])


def cov_suite(trials: int, seed: int) -> SuiteResult:
    rng = substream(seed, 1)
    worst = 0.0
    for _ in range(trials):
        prior = random_discrete_prior(rng)
        pmf = OutputPmf.of_discrete(prior)
        for y in _lattice(prior.dim):
            try:
                cov, asym = cond_cov_trg(pmf, y)
            except ConditioningOnNullEvent:
                continue
            diff = float(np.max(np.abs(cov - cov_direct_discrete(prior, y))))
            worst = max(worst, diff, asym)
    return SuiteResult("cov", trials, worst, TOLERANCES["cov"])


def laplace_residual_lattice(prior: DiscretePrior, est: LinearEstimator, t) -> np.ndarray:
    """E[(U - (H Y + c)) exp(-t.Y)] summed over a truncated count lattice.

    Each atom factorizes over coordinates, so the sum reduces to per-coordinate
    sums of Pois(y; u) exp(-t y) and y Pois(y; u) exp(-t y).
    """
    t = np.asarray(t, dtype=float)
    top = poisson_tail_cutoff(float(prior.atoms.max()), 1e-16) + 10
    ys = np.arange(top + 1)
    total = np.zeros(prior.dim)
    for w, u in zip(prior.weights, prior.atoms):
        a = poisson.pmf(ys[None, :], u[:, None]) * np.exp(-np.outer(t, ys))
        sums = a.sum(axis=1)
        firsts = a @ ys
        prod_all = np.prod(sums)
        # E[Y_k exp(-t.Y)] restricted to this atom
        ey = np.array([firsts[k] * np.prod(np.delete(sums, k)) for k in range(prior.dim)])
        total += w * ((u - est.offset) * prod_all - est.h_matrix @ ey)
    return total


def laplace_residual_suite(trials: int, seed: int) -> SuiteResult:
    rng = substream(seed, 2)
    worst = 0.0
    for _ in range(trials):
        prior = random_discrete_prior(rng)
        n = prior.dim
        est = LinearEstimator(rng.uniform(-0.5, 1.0, size=(n, n)), rng.uniform(0.0, 2.0, size=n))
        t = rng.uniform(0.0, 3.0, size=n)
        diff = laplace_residual(prior, est, t) - laplace_residual_lattice(prior, est, t)
        worst = max(worst, float(np.max(np.abs(diff))))
    return SuiteResult("laplace-residual", trials, worst, TOLERANCES["laplace-residual"])


RUNNERS = {"trg": trg_suite, "cov": cov_suite, "laplace-residual": laplace_residual_suite}


def run_suites(suite: str, trials: int, seed: int) -> list[SuiteResult]:
    names = SUITES if suite == "all" else (suite,)
    return [RUNNERS[name](trials, seed) for name in names]
