"""Domain types and gamma-distribution primitives shared by every module.

Parameter convention: every gamma distribution is stored as an explicit
``(shape, rate)`` pair with density

    f(x) = rate**shape / Gamma(shape) * x**(shape - 1) * exp(-rate * x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConditioningOnNullEvent(ZeroDivisionError):
    """Conditioning on an observation of probability zero."""


def _as_float_array(x, ndim: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise DomainError(f"shape must be > 0, got {self.shape}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise DomainError(f"rate must be > 0, got {self.rate}")

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def var(self) -> float:
        return self.shape / self.rate**2


@dataclass(frozen=True)
class GammaProductPrior:
    """Independent gamma coordinates, ``U_i ~ Gamma(shape_i, rate_i)``."""

    coords: tuple[GammaParams, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) < 1:
            raise DomainError("a product prior needs at least one coordinate")
        for p in self.coords:
            if not isinstance(p, GammaParams):
                raise DomainError("coords must be GammaParams")

    @classmethod
    def from_arrays(cls, shape, rate) -> "GammaProductPrior":
        shape = np.atleast_1d(np.asarray(shape, dtype=float))
        rate = np.atleast_1d(np.asarray(rate, dtype=float))
        if shape.shape != rate.shape or shape.ndim != 1:
            raise DomainError("shape and rate must be 1-d arrays of equal length")
        return cls(tuple(GammaParams(float(a), float(b)) for a, b in zip(shape, rate)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def shape(self) -> np.ndarray:
        return np.array([p.shape for p in self.coords])

    @property
    def rate(self) -> np.ndarray:
        return np.array([p.rate for p in self.coords])

    def mean(self) -> np.ndarray:
        return self.shape / self.rate

    def cov(self) -> np.ndarray:
        return np.diag(self.shape / self.rate**2)

    def laplace(self, s) -> float:
        """E[exp(-s.U)] for s >= 0."""
        s = np.asarray(s, dtype=float)
        return float(np.prod((1.0 + s / self.rate) ** (-self.shape)))

    def laplace_grad(self, s) -> np.ndarray:
        """Gradient of the Laplace transform, equal to -E[U exp(-s.U)]."""
        s = np.asarray(s, dtype=float)
        return -self.shape / (self.rate + s) * self.laplace(s)

    def charfn(self, t) -> complex:
        return gamma_product_charfn(self, t)

    def charfn_grad(self, t) -> np.ndarray:
        """Gradient of the characteristic function, i E[U exp(i t.U)]."""
        t = np.asarray(t, dtype=float)
        z = 1.0 - 1j * t / self.rate
        return 1j * self.shape / self.rate / z * self.charfn(t)


@dataclass(frozen=True)
class DiscretePrior:
    """Finite-support prior: ``U = atoms[j]`` with probability ``weights[j]``.

    Atoms must be entrywise nonnegative unless ``signed=True`` (the Gaussian
    channel accepts real-valued inputs).
    """

    atoms: np.ndarray
    weights: np.ndarray
    signed: bool = field(default=False)

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        if atoms.ndim != 2 or atoms.shape[0] < 1 or atoms.shape[1] < 1:
            raise DomainError(f"atoms must be a nonempty (m, n) array, got {atoms.shape}")
        weights = np.array(self.weights, dtype=float).ravel()
        if weights.shape != (atoms.shape[0],):
            raise DomainError("one weight per atom required")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite and >= 0")
        total = weights.sum()
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"weights sum to {total}, not 1")
        weights = weights / total
        if not np.all(np.isfinite(atoms)):
            raise DomainError("atoms must be finite")
        if not self.signed and np.any(atoms < 0):
            raise DomainError("atoms must be entrywise >= 0")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.atoms

    def cov(self) -> np.ndarray:
        centered = self.atoms - self.mean()
        return (centered * self.weights[:, None]).T @ centered

    def laplace(self, s) -> float:
        s = np.asarray(s, dtype=float)
        return float(self.weights @ np.exp(-self.atoms @ s))

    def laplace_grad(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return -(self.weights * np.exp(-self.atoms @ s)) @ self.atoms

    def charfn(self, t) -> complex:
        t = np.asarray(t, dtype=float)
        return complex(self.weights @ np.exp(1j * (self.atoms @ t)))

    def charfn_grad(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return 1j * (self.weights * np.exp(1j * (self.atoms @ t))) @ self.atoms

    def posterior_weights(self, y) -> np.ndarray:
        """Posterior atom weights given Poisson counts ``y`` (identity channel)."""
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            loglik = np.log(self.weights) + (xlogy(y, self.atoms) - self.atoms).sum(axis=1)
        top = loglik.max()
        if not np.isfinite(top):
            raise ConditioningOnNullEvent(f"P_Y({y.astype(int).tolist()}) = 0")
        w = np.exp(loglik - top)
        return w / w.sum()


@dataclass(frozen=True)
class PoissonChannel:
    """``Y = Poisson(A x + dark_current)`` with a nonnegativity-preserving A."""

    a_matrix: np.ndarray
    dark_current: np.ndarray

    def __post_init__(self):
        a = _as_float_array(self.a_matrix, 2, "a_matrix")
        lam = _as_float_array(np.atleast_1d(self.dark_current), 1, "dark_current")
        if lam.shape[0] != a.shape[0]:
            raise DomainError("dark_current length must equal the number of rows of A")
        if np.any(a < 0):
            raise DomainError("A must map the nonnegative orthant into itself (entries >= 0)")
        if np.any(lam < 0):
            raise DomainError("dark current entries must be >= 0")
        object.__setattr__(self, "a_matrix", a)
        object.__setattr__(self, "dark_current", lam)

    @property
    def k(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.a_matrix.shape[1]

    def intensity(self, x) -> np.ndarray:
        return self.a_matrix @ np.asarray(x, dtype=float) + self.dark_current


@dataclass(frozen=True)
class LinearEstimator:
    """The affine map ``y -> H y + c``."""

    h_matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        h = _as_float_array(np.atleast_2d(self.h_matrix), 2, "h_matrix")
        c = _as_float_array(np.atleast_1d(self.offset), 1, "offset")
        if h.shape[0] != c.shape[0]:
            raise DomainError(f"H has {h.shape[0]} rows but c has length {c.shape[0]}")
        object.__setattr__(self, "h_matrix", h)
        object.__setattr__(self, "offset", c)

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return y @ self.h_matrix.T + self.offset


def gamma_log_pdf(p: GammaParams, x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma density is evaluated at x > 0, got {x}")
    return (
        p.shape * math.log(p.rate)
        - math.lgamma(p.shape)
        + (p.shape - 1.0) * math.log(x)
        - p.rate * x
    )


def gamma_laplace(p: GammaParams, s: float) -> float:
    if s <= -p.rate:
        raise DomainError(f"Laplace transform diverges for s <= -rate ({s})")
    return (1.0 + s / p.rate) ** (-p.shape)


def gamma_product_charfn(prior: GammaProductPrior, t) -> complex:
    # Re(1 - i t / rate) = 1 > 0, so the principal branch is continuous in t.
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (prior.dim,):
        raise DomainError(f"t must have length {prior.dim}")
    z = 1.0 - 1j * t / prior.rate
    return complex(np.prod(z ** (-prior.shape)))


def s_of_t(t) -> np.ndarray:
    """Map Laplace arguments of the counts to those of the intensities."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("t must be entrywise >= 0")
    return -np.expm1(-t)


def log_poisson_pmf(y, mean):
    """log of mean**y exp(-mean) / y!, with the convention 0**0 = 1."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return xlogy(y, mean) - mean - gammaln(y + 1.0)
