"""Conditional-mean estimation under Poisson noise: gamma conjugacy, its
stability, dark-current effects and a Gaussian-noise counterpart."""

from .conjugacy import (
    NotRealizable,
    RealizabilityReport,
    corollary_check,
    estimator_of_prior,
    posterior,
    posterior_mean,
    prior_of_estimator,
)
from .core import (
    ConditioningOnNullEvent,
    DiscretePrior,
    DomainError,
    GammaParams,
    GammaProductPrior,
    LinearEstimator,
    PoissonChannel,
)
from .montecarlo import ConfigurationError, MonteCarloConfig
from .stability import CharGrid, StabilityReport, check_theorem2, default_char_grid

__version__ = "0.1.0"

__all__ = [
    "CharGrid",
    "ConditioningOnNullEvent",
    "ConfigurationError",
    "DiscretePrior",
    "DomainError",
    "GammaParams",
    "GammaProductPrior",
    "LinearEstimator",
    "MonteCarloConfig",
    "NotRealizable",
    "PoissonChannel",
    "RealizabilityReport",
    "StabilityReport",
    "check_theorem2",
    "corollary_check",
    "default_char_grid",
    "estimator_of_prior",
    "posterior",
    "posterior_mean",
    "prior_of_estimator",
]
