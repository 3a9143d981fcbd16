"""Product-gamma priors and the linear conditional-mean estimators they induce.

Under ``Y = Poisson(U)`` the conditional mean is affine, ``E[U|Y=y] = H y + c``,
exactly when ``U`` has independent gamma coordinates.  The two maps here go
back and forth between those descriptions:

    h_ii = 1 / (1 + rate_i)          rate_i  = (1 - h_ii) / h_ii
    c_i  = shape_i / (1 + rate_i)    shape_i = c_i / h_ii
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DomainError,
    GammaProductPrior,
    LinearEstimator,
    PoissonChannel,
    gamma_laplace,
)

DIAGONAL_TOL = 1e-12
LAPLACE_GRID = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)


class NotRealizable(ValueError):
    """A linear estimator that no prior can produce as its conditional mean."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


def estimator_of_prior(prior: GammaProductPrior) -> LinearEstimator:
    h = 1.0 / (1.0 + prior.rate)
    return LinearEstimator(np.diag(h), prior.shape * h)


def _off_diagonal_max(m: np.ndarray) -> float:
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off))) if off.size else 0.0


def prior_of_estimator(est: LinearEstimator) -> GammaProductPrior:
    h = est.h_matrix
    if h.shape[0] != h.shape[1]:
        raise NotRealizable("off_diagonal", f"H must be square, got {h.shape}")
    if _off_diagonal_max(h) > DIAGONAL_TOL:
        raise NotRealizable("off_diagonal", f"max |H_ij| off the diagonal is {_off_diagonal_max(h):.3g}")
    d = np.diag(h)
    if np.any(d <= 0) or np.any(d >= 1):
        raise NotRealizable("gain_out_of_range", f"diagonal entries {d.tolist()} not all in (0, 1)")
    if np.any(est.offset <= 0):
        raise NotRealizable("nonpositive_offset", f"offset {est.offset.tolist()} not all > 0")
    return GammaProductPrior.from_arrays(est.offset / d, (1.0 - d) / d)


def posterior(prior: GammaProductPrior, y) -> GammaProductPrior:
    y = np.atleast_1d(np.asarray(y))
    if y.shape != (prior.dim,):
        raise DomainError(f"y must have length {prior.dim}")
    if np.any(y < 0) or np.any(y != np.floor(y)):
        raise DomainError("counts must be nonnegative integers")
    return GammaProductPrior.from_arrays(prior.shape + y, prior.rate + 1.0)


def posterior_mean(prior: GammaProductPrior, y) -> np.ndarray:
    """Closed-form E[U|Y=y]; accepts a single count vector or a (N, n) batch."""
    y = np.asarray(y, dtype=float)
    return (prior.shape + y) / (prior.rate + 1.0)


@dataclass
class RealizabilityReport:
    verdict: bool
    failed: list[str]
    conditions: dict = field(default_factory=dict)
    prior: GammaProductPrior | None = None

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "failed": list(self.failed), "conditions": self.conditions}
        out["prior"] = (
            None
            if self.prior is None
            else {"shape": self.prior.shape.tolist(), "rate": self.prior.rate.tolist()}
        )
        return out


def corollary_check(channel: PoissonChannel, c_matrix, b) -> RealizabilityReport:
    """Decide whether ``E[X|Y=y] = C y + b`` is attainable for ``Y = Poisson(A X + lam)``.

    All conditions are evaluated; ``failed`` lists every one that does not hold.
    """
    a = channel.a_matrix
    c_matrix = np.atleast_2d(np.asarray(c_matrix, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if c_matrix.shape != (channel.n, channel.k):
        raise DomainError(f"C must be {channel.n}x{channel.k}, got {c_matrix.shape}")
    if b.shape != (channel.n,):
        raise DomainError(f"b must have length {channel.n}, got {b.shape}")

    ac = a @ c_matrix
    ab = a @ b
    diag = np.diag(ac)
    conditions = {
        "dark_current_zero": bool(np.all(channel.dark_current == 0)),
        "ac_diagonal": _off_diagonal_max(ac) <= DIAGONAL_TOL,
        "ac_gain_in_range": bool(np.all((diag > 0) & (diag < 1))),
        "ab_positive": bool(np.all(ab > 0)),
    }
    reasons = {
        "dark_current_zero": "dark_current_nonzero",
        "ac_diagonal": "off_diagonal",
        "ac_gain_in_range": "gain_out_of_range",
        "ab_positive": "nonpositive_offset",
    }
    failed = [reasons[name] for name, ok in conditions.items() if not ok]
    report = RealizabilityReport(not failed, failed, conditions)
    if report.verdict:
        report.prior = GammaProductPrior.from_arrays(ab / diag, (1.0 - diag) / diag)
    return report


def theorem1_laplace_check(prior: GammaProductPrior, grid=LAPLACE_GRID) -> float:
    """Max |closed-form Laplace transform from (H, c) - product of gamma transforms|.

    The transform implied by a linear estimator is
    ``prod_k (1 + h_kk s_k / (1 - h_kk)) ** (-c_k / h_kk)``.
    """
    est = estimator_of_prior(prior)
    h = np.diag(est.h_matrix)
    exponent = est.offset / h
    worst = 0.0
    for s in itertools.product(grid, repeat=prior.dim):
        s = np.array(s)
        implied = float(np.prod((1.0 + h * s / (1.0 - h)) ** (-exponent)))
        direct = float(np.prod([gamma_laplace(p, si) for p, si in zip(prior.coords, s)]))
        worst = max(worst, abs(implied - direct))
    return worst
