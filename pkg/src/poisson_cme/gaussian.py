"""Gaussian-noise counterpart: ``Y = A X + Z`` with ``Z ~ N(0, I)``.

The conditional mean is affine for every covariance of a Gaussian input, and a
near-affine conditional mean forces ``A X`` close to Gaussian in
characteristic-function distance.  Unlike the Poisson case, the input-side
bound degrades like ``exp(||t||^2 / 2)``; only the output-side bound is uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DiscretePrior, DomainError
from .montecarlo import MonteCarloConfig, map_chunks, mean_and_stderr
from .stability import (
    ROUNDING_FLOOR,
    SIGMA_MULTIPLIER,
    CharGrid,
    StabilityReport,
    evidence_label,
)

SINGULAR_TOL = 1e-10


@dataclass(frozen=True)
class GaussianModel:
    mu: np.ndarray
    k_matrix: np.ndarray
    a_matrix: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        k = np.atleast_2d(np.asarray(self.k_matrix, dtype=float))
        a = np.atleast_2d(np.asarray(self.a_matrix, dtype=float))
        n = mu.shape[0]
        if mu.ndim != 1 or k.shape != (n, n):
            raise DomainError(f"K must be {n}x{n}, got {k.shape}")
        if a.shape[1] != n:
            raise DomainError(f"A must have {n} columns, got {a.shape}")
        if np.max(np.abs(k - k.T)) > 1e-12:
            raise DomainError("K must be symmetric")
        if np.min(np.linalg.eigvalsh(k)) < -1e-12:
            raise DomainError("K must be positive semidefinite")
        for arr in (mu, k, a):
            arr.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "k_matrix", k)
        object.__setattr__(self, "a_matrix", a)

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    @property
    def k(self) -> int:
        return self.a_matrix.shape[0]

    @classmethod
    def moment_matched(cls, prior: DiscretePrior, a_matrix) -> "GaussianModel":
        return cls(prior.mean(), prior.cov(), a_matrix)

    def sample_x(self, rng: np.random.Generator, size: int) -> np.ndarray:
        vals, vecs = np.linalg.eigh(self.k_matrix)
        factor = vecs * np.sqrt(np.clip(vals, 0.0, None))
        return self.mu + rng.standard_normal((size, self.n)) @ factor.T


def gaussian_lmmse(model: GaussianModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """H = K A^T (A K A^T + I)^{-1}, c = mu - H A mu, Sigma = (I - A H)^{-1} A H."""
    a, k = model.a_matrix, model.k_matrix
    gram = a @ k @ a.T + np.eye(model.k)
    # H^T = gram^{-1} A K since gram and K are symmetric
    h = np.linalg.solve(gram, a @ k).T
    c = model.mu - h @ (a @ model.mu)
    ah = a @ h
    sigma = np.linalg.solve(np.eye(model.k) - ah, ah)
    return h, c, sigma


def singular_values(m) -> np.ndarray:
    """Singular values, largest first, by one-sided Jacobi rotations."""
    work = np.array(np.atleast_2d(m), dtype=float)
    if work.size == 0:
        raise DomainError("empty matrix")
    if work.shape[0] < work.shape[1]:
        work = work.T.copy()
    cols = work.shape[1]
    for _ in range(100):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = work[:, p] @ work[:, p]
                beta = work[:, q] @ work[:, q]
                gamma = work[:, p] @ work[:, q]
                if gamma == 0.0 or abs(gamma) <= 1e-15 * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                tan = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                cos = 1.0 / math.sqrt(1.0 + tan * tan)
                sin = cos * tan
                col_p = work[:, p].copy()
                work[:, p] = cos * col_p - sin * work[:, q]
                work[:, q] = sin * col_p + cos * work[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(work, axis=0))[::-1]


def operator_norm(m) -> float:
    return float(singular_values(m)[0])


def sigma_min(m) -> float:
    return float(singular_values(m)[-1])


def cme_gaussian_discrete(prior: DiscretePrior, a_matrix: np.ndarray, y: np.ndarray) -> np.ndarray:
    """E[X|Y=y] for a finite-support X under unit Gaussian noise, one row per observation."""
    means = prior.atoms @ a_matrix.T
    sq = (
        np.einsum("ij,ij->i", y, y)[:, None]
        - 2.0 * y @ means.T
        + np.einsum("ij,ij->i", means, means)[None, :]
    )
    loglik = np.log(prior.weights)[None, :] - 0.5 * sq
    loglik -= loglik.max(axis=1, keepdims=True)
    w = np.exp(loglik)
    w /= w.sum(axis=1, keepdims=True)
    return w @ prior.atoms


def _sample_x(model: GaussianModel, prior: DiscretePrior | None, rng, size) -> np.ndarray:
    if prior is None:
        return model.sample_x(rng, size)
    idx = rng.choice(len(prior.weights), size=size, p=prior.weights)
    return prior.atoms[idx]


def epsilon_mse_gaussian(
    model: GaussianModel, prior: DiscretePrior | None, mc: MonteCarloConfig
) -> tuple[float, float]:
    """E||E[X|Y] - (H Y + c)||^2 with (H, c) from ``model``; X ~ prior, or N(mu, K) if None."""
    mc.require_oracle_budget()
    h, c, _ = gaussian_lmmse(model)
    a = model.a_matrix

    def draw(rng, size):
        x = _sample_x(model, prior, rng, size)
        y = x @ a.T + rng.standard_normal((size, model.k))
        linear = y @ h.T + c
        exact = linear if prior is None else cme_gaussian_discrete(prior, a, y)
        diff = exact - linear
        return np.einsum("ij,ij->i", diff, diff)

    mean, se = mean_and_stderr(draw, mc)
    return float(mean), float(se)


@dataclass
class RegressionFit:
    h_hat: np.ndarray
    c_hat: np.ndarray
    h_se: np.ndarray
    c_se: np.ndarray
    residual_mse: float


def regress_cme(model: GaussianModel, mc: MonteCarloConfig) -> RegressionFit:
    """Ordinary least squares of X on (Y, 1) for Gaussian X; recovers (H, c)."""
    mc.require_oracle_budget()
    a = model.a_matrix

    def stats(rng, size):
        x = model.sample_x(rng, size)
        y = x @ a.T + rng.standard_normal((size, model.k))
        design = np.hstack([y, np.ones((size, 1))])
        return design.T @ design, design.T @ x, x.T @ x

    parts = map_chunks(stats, mc)
    gram = sum(p[0] for p in parts)
    cross = sum(p[1] for p in parts)
    xx = sum(p[2] for p in parts)
    coef = np.linalg.solve(gram, cross)
    # residual sum of squares per output coordinate: x'x - coef' D'D coef
    rss = np.diag(xx) - np.einsum("ij,ik,kj->j", coef, gram, coef)
    dof = mc.samples - gram.shape[0]
    gram_inv_diag = np.diag(np.linalg.inv(gram))
    se = np.sqrt(np.outer(gram_inv_diag, np.clip(rss, 0.0, None) / dof))
    return RegressionFit(
        h_hat=coef[:-1].T,
        c_hat=coef[-1],
        h_se=se[:-1].T,
        c_se=se[-1],
        residual_mse=float(np.sum(rss) / mc.samples),
    )


def charfn_ax(model: GaussianModel, prior: DiscretePrior | None, t) -> complex:
    t = np.asarray(t, dtype=float)
    a = model.a_matrix
    if prior is None:
        mean = t @ (a @ model.mu)
        var = t @ (a @ model.k_matrix @ a.T) @ t
        return complex(np.exp(1j * mean - 0.5 * var))
    return complex(prior.weights @ np.exp(1j * (prior.atoms @ (a.T @ t))))


def check_theorem4(
    model: GaussianModel, prior: DiscretePrior | None, grid: CharGrid, mc: MonteCarloConfig
) -> StabilityReport:
    """Evaluate both Gaussian stability bounds on ``grid`` (points in R^k).

    ``prior=None`` means X is exactly N(mu, K).  The Gaussian comparison
    function carries the mean phase ``exp(i t.A mu)``; for centred inputs it is
    ``exp(-t' Sigma t / 2)``.
    """
    if grid.dim != model.k:
        raise DomainError(f"grid points must lie in R^{model.k}")
    if prior is not None and prior.dim != model.n:
        raise DomainError("prior and model dimensions differ")
    h, _, sigma = gaussian_lmmse(model)
    a = model.a_matrix
    s_min = sigma_min(np.eye(model.k) - a @ h)
    a_norm = operator_norm(a)
    eps, se = epsilon_mse_gaussian(model, prior, mc)

    scale = a_norm / s_min if s_min > 0 else math.inf
    rhs_out = math.sqrt(max(eps, 0.0)) * scale
    rhs_out_cons = math.sqrt(max(eps + SIGMA_MULTIPLIER * se, 0.0)) * scale
    mean_ax = a @ model.mu

    per_point, input_points = [], []
    lhs_out_max = 0.0
    input_holds = True
    for t in grid.points:
        norm = float(np.linalg.norm(t))
        target = np.exp(1j * (t @ mean_ax) - 0.5 * (t @ sigma @ t))
        lhs_in = abs(charfn_ax(model, prior, t) - target) / norm
        phi_z = math.exp(-0.5 * norm**2)
        with np.errstate(over="ignore"):
            inv_phi_z = float(np.exp(0.5 * norm**2))
        rhs_in = rhs_out * inv_phi_z if rhs_out > 0 else 0.0
        rhs_in_cons = rhs_out_cons * inv_phi_z if rhs_out_cons > 0 else 0.0
        lhs_out = phi_z * lhs_in
        lhs_out_max = max(lhs_out_max, lhs_out)
        ok = lhs_in <= rhs_in_cons + ROUNDING_FLOOR
        input_holds &= ok
        input_points.append(
            {"t": t.tolist(), "lhs": lhs_in, "rhs": rhs_in, "rhs_conservative": rhs_in_cons, "holds": ok}
        )
        per_point.append({"t": t.tolist(), "ratio": lhs_out})

    output_holds = lhs_out_max <= rhs_out_cons + ROUNDING_FLOOR
    holds = bool(input_holds and output_holds)
    return StabilityReport(
        epsilon_hat=eps,
        std_err=se,
        lhs_sup_on_grid=lhs_out_max,
        rhs_bound=rhs_out,
        rhs_conservative=rhs_out_cons,
        holds=holds,
        per_point=per_point,
        ill_conditioned=s_min < SINGULAR_TOL,
        model="gaussian",
        evidence=evidence_label(holds),
        extra={
            "operator_norm_a": a_norm,
            "sigma_min_i_minus_ah": s_min,
            "output_bound": {"kind": "uniform", "holds": bool(output_holds)},
            "input_bound": {"kind": "pointwise", "holds": bool(input_holds), "per_point": input_points},
        },
    )
