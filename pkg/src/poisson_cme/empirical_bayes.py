"""Conditional moments of U from the output pmf alone (Y = Poisson(U)).

The conditional mean is a ratio of neighbouring pmf values,

    E[U_i | Y=y] = (y_i + 1) P_Y(y + e_i) / P_Y(y),

and the conditional covariance follows by applying the same identity twice.
Exact pmfs for discrete and product-gamma priors act as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.special import gammaln, xlogy
from scipy.stats import poisson

from .core import ConditioningOnNullEvent, DiscretePrior, GammaProductPrior, log_poisson_pmf
from .montecarlo import MonteCarloConfig, map_chunks, sample_prior

Provenance = Literal["exact_discrete", "monte_carlo", "closed_form"]


@dataclass(frozen=True)
class OutputPmf:
    evaluator: Callable[[np.ndarray], float]
    provenance: Provenance
    dim: int
    stderr: Callable[[np.ndarray], float] | None = None

    def __call__(self, y) -> float:
        return self.evaluator(np.atleast_1d(np.asarray(y, dtype=int)))

    @classmethod
    def of_discrete(cls, prior: DiscretePrior) -> "OutputPmf":
        return cls(lambda y: pmf_discrete(prior, y), "exact_discrete", prior.dim)

    @classmethod
    def of_gamma(cls, prior: GammaProductPrior) -> "OutputPmf":
        return cls(lambda y: pmf_gamma(prior, y), "closed_form", prior.dim)

    @classmethod
    def monte_carlo(cls, prior, mc: MonteCarloConfig) -> "OutputPmf":
        """Average of prod_i Pois(y_i; U_i) over a fixed set of prior draws."""
        mc.require_oracle_budget()
        draws = np.concatenate(map_chunks(lambda rng, size: sample_prior(prior, rng, size), mc))

        def terms(y):
            return np.exp(log_poisson_pmf(y, draws).sum(axis=1))

        def evaluate(y):
            return float(terms(y).mean())

        def stderr(y):
            t = terms(np.atleast_1d(np.asarray(y, dtype=int)))
            return float(t.std(ddof=1) / np.sqrt(t.size))

        return cls(evaluate, "monte_carlo", draws.shape[1], stderr)


def pmf_discrete(prior: DiscretePrior, y) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    logs = log_poisson_pmf(y, prior.atoms).sum(axis=1)
    return float(prior.weights @ np.exp(logs))


def pmf_gamma(prior: GammaProductPrior, y) -> float:
    """Product of negative-binomial pmfs, the marginal of Poisson-gamma coordinates."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a, r = prior.shape, prior.rate
    logs = (
        gammaln(a + y)
        - gammaln(a)
        - gammaln(y + 1.0)
        + xlogy(a, r / (r + 1.0))
        - y * np.log1p(r)
    )
    return float(np.exp(logs.sum()))


def _unit(n: int, i: int) -> np.ndarray:
    e = np.zeros(n, dtype=int)
    e[i] = 1
    return e


def cme_trg(pmf: OutputPmf, y) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=int))
    p0 = pmf(y)
    if p0 <= 0:
        raise ConditioningOnNullEvent(f"P_Y({y.tolist()}) = 0")
    return np.array([(y[i] + 1) * pmf(y + _unit(pmf.dim, i)) / p0 for i in range(pmf.dim)])


def cond_cov_trg(pmf: OutputPmf, y) -> tuple[np.ndarray, float]:
    """Conditional covariance of U given Y=y, and its asymmetry before symmetrizing.

    Entry (i, j) is E[U_i|y] (E[U_j|y + e_i] - E[U_j|y]).
    """
    y = np.atleast_1d(np.asarray(y, dtype=int))
    mean = cme_trg(pmf, y)
    n = pmf.dim
    cov = np.empty((n, n))
    for i in range(n):
        cov[i] = mean[i] * (cme_trg(pmf, y + _unit(n, i)) - mean)
    asymmetry = float(np.max(np.abs(cov - cov.T)))
    return 0.5 * (cov + cov.T), asymmetry


def cme_direct_discrete(prior: DiscretePrior, y) -> np.ndarray:
    """Bayes rule over the atoms."""
    return prior.posterior_weights(np.atleast_1d(y)) @ prior.atoms


def cov_direct_discrete(prior: DiscretePrior, y) -> np.ndarray:
    w = prior.posterior_weights(np.atleast_1d(y))
    centered = prior.atoms - w @ prior.atoms
    return (centered * w[:, None]).T @ centered


def cme_discrete_batch(prior: DiscretePrior, ys: np.ndarray) -> np.ndarray:
    """Direct-Bayes conditional means for each row of ``ys`` (shape (N, n))."""
    ys = np.asarray(ys)
    uniq, inverse = np.unique(ys, axis=0, return_inverse=True)
    with np.errstate(divide="ignore"):
        loglik = np.log(prior.weights)[None, :] + (
            xlogy(uniq[:, None, :], prior.atoms[None, :, :]) - prior.atoms[None, :, :]
        ).sum(axis=2)
    loglik -= loglik.max(axis=1, keepdims=True)
    w = np.exp(loglik)
    w /= w.sum(axis=1, keepdims=True)
    return (w @ prior.atoms)[inverse.ravel()]


def poisson_tail_cutoff(mean: float, tail: float = 1e-10) -> int:
    """Smallest K with P(Poisson(mean) > K) < tail."""
    return int(poisson.isf(tail, mean)) + 1
