import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from poisson_cme import DiscretePrior, GammaProductPrior

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

positive = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)


@st.composite
def gamma_priors(draw, max_dim=3):
    n = draw(st.integers(1, max_dim))
    shape = draw(st.lists(positive, min_size=n, max_size=n))
    rate = draw(st.lists(positive, min_size=n, max_size=n))
    return GammaProductPrior.from_arrays(shape, rate)


def atom_values(hi):
    # exact zeros exercise the 0**0 convention; subnormals would only test underflow
    return st.one_of(st.just(0.0), st.floats(1e-3, hi, allow_nan=False))


@st.composite
def discrete_priors(draw, max_atoms=5, max_dim=3, hi=8.0):
    m = draw(st.integers(1, max_atoms))
    n = draw(st.integers(1, max_dim))
    atoms = draw(
        st.lists(
            st.lists(atom_values(hi), min_size=n, max_size=n),
            min_size=m,
            max_size=m,
        )
    )
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=m, max_size=m))
    w = np.array(raw) / sum(raw)
    return DiscretePrior(np.array(atoms), w)


@pytest.fixture
def exp3():
    """Exponential prior with rate 3, the running scalar example."""
    return GammaProductPrior.from_arrays([1.0], [3.0])


@pytest.fixture
def two_point():
    return DiscretePrior([[1.0], [3.0]], [0.5, 0.5])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
