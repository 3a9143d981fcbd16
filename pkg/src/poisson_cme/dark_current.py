"""Scalar exponential prior observed through Poisson noise with dark current.

Model: ``X ~ Exp(alpha)``, ``Y = Poisson(a X + lam)``.  With ``lam > 0`` the
conditional mean is no longer affine; this module evaluates it exactly and
compares it with two affine surrogates (the LMMSE line and the zero-dark-current
line shifted down by the dark current).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import ConditioningOnNullEvent, DomainError

# Below this, both bracketed differences in the literal pmf formula are pure
# rounding noise and the literal path hands over to quadrature.
CANCELLATION_FLOOR = 1e-14


@dataclass(frozen=True)
class ScalarDcModel:
    alpha: float
    a: float
    lam: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError("alpha must be > 0")
        if not self.a > 0:
            raise DomainError("a must be > 0")
        if not self.lam >= 0:
            raise DomainError("lambda must be >= 0")

    @property
    def ratio(self) -> float:
        return self.alpha / self.a

    @property
    def prior_mean(self) -> float:
        return 1.0 / self.alpha

    @property
    def prior_var(self) -> float:
        return 1.0 / self.alpha**2


def _log_poisson_terms(k: int, x: float) -> list[float]:
    """log(x**m / m!) for m = 0..k-1."""
    if x == 0:
        return [0.0] + [-math.inf] * (k - 1)
    lx = math.log(x)
    return [m * lx - math.lgamma(m + 1) for m in range(k)]


def _log_fsum_exp(logs: list[float]) -> float:
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def log_upper_inc_gamma_int(k: int, x: float) -> float:
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive integer, got {k}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    return math.lgamma(k) - x + _log_fsum_exp(_log_poisson_terms(int(k), x))


def upper_inc_gamma_int(k: int, x: float) -> float:
    """Gamma(k, x) = (k-1)! e^{-x} sum_{m<k} x^m / m! for integer k >= 1."""
    return math.exp(log_upper_inc_gamma_int(k, x))


def regularized_upper_gamma_int(k: int, x: float) -> float:
    """Gamma(k, x) / Gamma(k), i.e. P(Poisson(x) <= k - 1)."""
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    return math.exp(-x + _log_fsum_exp(_log_poisson_terms(int(k), x)))


def log_output_pmf(model: ScalarDcModel, k: int) -> float:
    """log P_Y(k).

    The closed form
        P_Y(k) = G(k+1, lam) - G(k, lam)
                 + e^{r lam} (1+r)^{-k} [G(k, lam(1+r)) - G(k+1, lam(1+r)) / (1+r)],
    with ``G`` the regularized upper incomplete gamma and ``r = alpha / a``,
    expands term by term into the positive sum
        r / (1+r) * sum_{m=0}^{k} Pois(m; lam) (1+r)^{-(k-m)},
    which is evaluated here so that no differences of nearly equal numbers occur.
    """
    if k < 0 or int(k) != k:
        raise DomainError(f"k must be a nonnegative integer, got {k}")
    k = int(k)
    r = model.ratio
    log_q = math.log1p(r)
    logs = [
        term - model.lam - (k - m) * log_q
        for m, term in enumerate(_log_poisson_terms(k + 1, model.lam))
    ]
    return math.log(r) - log_q + _log_fsum_exp(logs)


def output_pmf(model: ScalarDcModel, k: int) -> float:
    if k == 0:
        return model.alpha * math.exp(-model.lam) / (model.alpha + model.a)
    return math.exp(log_output_pmf(model, k))


def _pmf_quadrature(model: ScalarDcModel, k: int) -> float:
    def integrand(x):
        mean = model.a * x + model.lam
        log_pois = (k * math.log(mean) if k else 0.0) - mean - math.lgamma(k + 1)
        return math.exp(log_pois + math.log(model.alpha) - model.alpha * x)

    # the integrand peaks near x = (k - lam) / a; split there for adaptive quad
    peak = max((k - model.lam) / model.a, 0.0)
    points = sorted({0.0, peak, peak + 10.0 * math.sqrt(k + 1.0) / model.a})
    total = sum(
        integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
        for lo, hi in zip(points[:-1], points[1:])
    )
    return total + integrate.quad(integrand, points[-1], np.inf, epsabs=1e-14, limit=200)[0]


def output_pmf_literal(model: ScalarDcModel, k: int) -> tuple[float, bool]:
    """The closed form evaluated term by term as printed.

    Returns ``(value, used_quadrature)``.  For large ``k`` both bracketed
    differences suffer catastrophic cancellation; when both fall below
    ``CANCELLATION_FLOOR`` the value is recomputed by quadrature.
    """
    if k == 0:
        return output_pmf(model, 0), False
    r, lam = model.ratio, model.lam
    x = lam * (1.0 + r)
    g = regularized_upper_gamma_int
    first = g(k + 1, lam) - g(k, lam)
    second = g(k, x) - g(k + 1, x) / (1.0 + r)
    if abs(first) < CANCELLATION_FLOOR and abs(second) < CANCELLATION_FLOOR:
        return _pmf_quadrature(model, k), True
    return first + math.exp(r * lam - k * math.log1p(r)) * second, False


def cme_dc(model: ScalarDcModel, k: int) -> float:
    """E[X | Y=k] = ((k+1) P_Y(k+1) / P_Y(k) - lam) / a."""
    log_p = log_output_pmf(model, k)
    if log_p == -math.inf:
        raise ConditioningOnNullEvent(f"P_Y({k}) = 0")
    ratio = math.exp(log_output_pmf(model, k + 1) - log_p)
    return ((k + 1) * ratio - model.lam) / model.a


def lmmse(prior_mean: float, prior_var: float, a: float, lam: float) -> tuple[float, float]:
    """Slope and intercept of the best affine estimator of X from Y = Poisson(aX + lam)."""
    if not prior_var > 0:
        raise DomainError("prior_var must be > 0")
    slope = a * prior_var / (a**2 * prior_var + a * prior_mean + lam)
    return slope, prior_mean - slope * (a * prior_mean + lam)


def shifted_zero_dc_estimator(model: ScalarDcModel, k: int) -> float:
    """Zero-dark-current LMMSE line, shifted down by the dark current in X units."""
    slope0, intercept0 = lmmse(model.prior_mean, model.prior_var, model.a, 0.0)
    return slope0 * k + intercept0 - model.lam / model.a


@dataclass(frozen=True)
class FigureRow:
    k: int
    cme: float
    lmmse: float
    shifted_zero_dc: float


def figure_data(model: ScalarDcModel, k_max: int) -> list[FigureRow]:
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    slope, intercept = lmmse(model.prior_mean, model.prior_var, model.a, model.lam)
    return [
        FigureRow(k, cme_dc(model, k), slope * k + intercept, shifted_zero_dc_estimator(model, k))
        for k in range(k_max + 1)
    ]


CSV_HEADER = ("k", "cme", "lmmse", "shifted_zero_dc")


def figure_csv(rows: list[FigureRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [row.k, f"{row.cme:.12g}", f"{row.lmmse:.12g}", f"{row.shifted_zero_dc:.12g}"]
        )
    return buf.getvalue()
