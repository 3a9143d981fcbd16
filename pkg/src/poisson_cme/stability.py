"""Near-linear conditional means force near-gamma priors.

If ``E||E[U|Y] - (H Y + c)||^2 <= eps`` with ``(H, c)`` the estimator of a
product-gamma prior G, then for every ``t``

    |phi_U(t) - phi_G(t)| / ||t|| <= sqrt(eps) / (1 - max_k h_kk).

The sup over ``t`` is replaced by a finite grid, so the grid maximum is a
lower bound on the left-hand side: ``holds=False`` is a genuine
counterexample, ``holds=True`` is evidence only.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .conjugacy import estimator_of_prior, posterior_mean
from .core import (
    DiscretePrior,
    DomainError,
    GammaProductPrior,
    LinearEstimator,
    log_poisson_pmf,
    s_of_t,
)
from .empirical_bayes import cme_discrete_batch, poisson_tail_cutoff
from .montecarlo import MonteCarloConfig, map_chunks, mean_and_stderr, sample_prior

ILL_CONDITIONED_GAP = 1e-6
SIGMA_MULTIPLIER = 4.0
# absolute slack for rounding when both sides are ~0 (prior equal to target)
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class CharGrid:
    points: np.ndarray
    provenance: Literal["default_log_grid", "user"] = "user"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise DomainError("a grid needs at least one point")
        if np.any(np.linalg.norm(pts, axis=1) == 0):
            raise DomainError("grid points must be nonzero")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def default_char_grid(n: int, per_axis: int, lo: float = 1e-2, hi: float = 1e2) -> CharGrid:
    """Log-spaced magnitudes along every signed axis and every signed diagonal."""
    if per_axis < 2:
        raise DomainError("per_axis must be >= 2")
    if n < 1:
        raise DomainError("n must be >= 1")
    mags = np.logspace(math.log10(lo), math.log10(hi), per_axis)
    points = []
    for axis in range(n):
        for sign in (1.0, -1.0):
            for m in mags:
                p = np.zeros(n)
                p[axis] = sign * m
                points.append(p)
    if n > 1:
        for signs in itertools.product((1.0, -1.0), repeat=n):
            for m in mags:
                points.append(m * np.array(signs))
    return CharGrid(np.array(points), "default_log_grid")


def _as_prior_pair(prior, est: LinearEstimator):
    if est.dim != prior.dim or est.h_matrix.shape[1] != prior.dim:
        raise DomainError("estimator and prior dimensions differ")


def laplace_residual(prior, est: LinearEstimator, t) -> np.ndarray:
    """E[(U - (H Y + c)) exp(-t.Y)] in closed form, for ``Y = Poisson(U)`` and ``t >= 0``.

    Equals ``-(H (diag(s) - I) + I) grad L(s) - c L(s)`` with ``s = 1 - exp(-t)``.
    """
    _as_prior_pair(prior, est)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = s_of_t(t)
    h = est.h_matrix
    n = prior.dim
    m = h @ (np.diag(s) - np.eye(n)) + np.eye(n)
    return -m @ prior.laplace_grad(s) - est.offset * prior.laplace(s)


def laplace_residual_mc(prior, est: LinearEstimator, t, mc: MonteCarloConfig):
    """Monte Carlo estimate (mean, stderr) of the quantity in ``laplace_residual``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))

    def draw(rng, size):
        u = sample_prior(prior, rng, size)
        y = rng.poisson(u)
        return (u - est(y)) * np.exp(-(y @ t))[:, None]

    return mean_and_stderr(draw, mc)


def char_residual(prior, target: GammaProductPrior, t) -> np.ndarray:
    """(i I + diag(t / rate)) grad phi_U(t) + (shape / rate) phi_U(t); zero iff U ~ target."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    grad = prior.charfn_grad(t)
    return (1j + t / target.rate) * grad + target.shape / target.rate * prior.charfn(t)


def true_cme(prior, y: np.ndarray) -> np.ndarray:
    """Exact E[U|Y=y] for each row of ``y``."""
    if isinstance(prior, GammaProductPrior):
        return posterior_mean(prior, y)
    if isinstance(prior, DiscretePrior):
        return cme_discrete_batch(prior, y)
    raise TypeError(f"no closed-form conditional mean for {type(prior).__name__}")


def epsilon_mse(prior, est: LinearEstimator, mc: MonteCarloConfig) -> tuple[float, float]:
    """Monte Carlo E||E[U|Y] - (H Y + c)||^2 with its standard error."""
    _as_prior_pair(prior, est)
    mc.require_oracle_budget()

    def draw(rng, size):
        y = rng.poisson(sample_prior(prior, rng, size))
        diff = true_cme(prior, y) - est(y)
        return np.einsum("ij,ij->i", diff, diff)

    mean, se = mean_and_stderr(draw, mc)
    return float(mean), float(se)


def epsilon_lattice(prior: DiscretePrior, est: LinearEstimator, tail: float = 1e-14) -> float:
    """Deterministic E||E[U|Y] - (H Y + c)||^2 for a discrete prior by summing over counts.

    The count lattice is truncated where the Poisson tail at the largest atom
    drops below ``tail``; meant for n <= 3.
    """
    _as_prior_pair(prior, est)
    top = poisson_tail_cutoff(float(prior.atoms.max()), tail)
    grids = np.meshgrid(*[np.arange(top + 1)] * prior.dim, indexing="ij")
    ys = np.stack([g.ravel() for g in grids], axis=1)
    logs = log_poisson_pmf(ys[:, None, :], prior.atoms[None, :, :]).sum(axis=2)
    p_y = np.exp(logs) @ prior.weights
    diff = cme_discrete_batch(prior, ys) - est(ys)
    return float(math.fsum(p_y * np.einsum("ij,ij->i", diff, diff)))


def best_linear_fit(prior, mc: MonteCarloConfig) -> LinearEstimator:
    """Least-squares (H, c) regressing the true conditional mean on (Y, 1)."""
    mc.require_oracle_budget()

    def stats(rng, size):
        y = rng.poisson(sample_prior(prior, rng, size)).astype(float)
        design = np.hstack([y, np.ones((size, 1))])
        return design.T @ design, design.T @ true_cme(prior, y)

    parts = map_chunks(stats, mc)
    gram = sum(p[0] for p in parts)
    cross = sum(p[1] for p in parts)
    coef = np.linalg.solve(gram, cross)
    return LinearEstimator(coef[:-1].T, coef[-1])


def moment_matched_gamma(prior) -> GammaProductPrior:
    """Per-coordinate gamma with the same mean and variance."""
    mean = prior.mean()
    var = np.diag(prior.cov())
    if np.any(mean <= 0) or np.any(var <= 0):
        raise DomainError("moment matching needs positive mean and variance in every coordinate")
    return GammaProductPrior.from_arrays(mean**2 / var, mean / var)


@dataclass
class StabilityReport:
    epsilon_hat: float
    std_err: float
    lhs_sup_on_grid: float
    rhs_bound: float
    rhs_conservative: float
    holds: bool
    per_point: list[dict] = field(default_factory=list)
    ill_conditioned: bool = False
    model: str = "poisson"
    evidence: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        extra = out.pop("extra")
        out.update(extra)
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(_finite_or_none(self.to_dict()), **kwargs)


def _finite_or_none(obj):
    """JSON has no infinities; unbounded values are written as null."""
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite_or_none(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def evidence_label(holds: bool) -> str:
    return "grid_evidence" if holds else "counterexample"


def check_theorem2(prior, target: GammaProductPrior, grid: CharGrid, mc: MonteCarloConfig) -> StabilityReport:
    if grid.dim != prior.dim or target.dim != prior.dim:
        raise DomainError("prior, target and grid dimensions differ")
    est = estimator_of_prior(target)
    gap = 1.0 - float(np.max(np.diag(est.h_matrix)))
    eps, se = epsilon_mse(prior, est, mc)

    per_point = []
    lhs = 0.0
    for t in grid.points:
        ratio = abs(prior.charfn(t) - target.charfn(t)) / float(np.linalg.norm(t))
        lhs = max(lhs, ratio)
        per_point.append({"t": t.tolist(), "ratio": ratio})

    rhs = math.sqrt(max(eps, 0.0)) / gap
    rhs_conservative = math.sqrt(max(eps + SIGMA_MULTIPLIER * se, 0.0)) / gap
    holds = lhs <= rhs_conservative + ROUNDING_FLOOR
    return StabilityReport(
        epsilon_hat=eps,
        std_err=se,
        lhs_sup_on_grid=lhs,
        rhs_bound=rhs,
        rhs_conservative=rhs_conservative,
        holds=holds,
        per_point=per_point,
        ill_conditioned=gap < ILL_CONDITIONED_GAP,
        model="poisson",
        evidence=evidence_label(holds),
    )
