import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisson_cme.core import DiscretePrior, DomainError
from poisson_cme.gaussian import (
    GaussianModel,
    check_theorem4,
    cme_gaussian_discrete,
    gaussian_lmmse,
    operator_norm,
    regress_cme,
    sigma_min,
    singular_values,
)
from poisson_cme.montecarlo import MonteCarloConfig, substream
from poisson_cme.stability import default_char_grid
from poisson_cme.trials import random_gaussian_model

GOLDEN = (1 + 5**0.5) / 2


class TestModel:
    def test_rejects_asymmetric(self):
        with pytest.raises(DomainError):
            GaussianModel([0, 0], [[1, 0.5], [0, 1]], [[1, 0]])

    def test_rejects_indefinite(self):
        with pytest.raises(DomainError):
            GaussianModel([0, 0], [[1, 2], [2, 1]], [[1, 0]])

    def test_rejects_bad_a(self):
        with pytest.raises(DomainError):
            GaussianModel([0], [[1]], [[1, 1]])


class TestLmmse:
    def test_unit(self):
        h, c, sigma = gaussian_lmmse(GaussianModel([0.0], [[1.0]], [[1.0]]))
        np.testing.assert_allclose(h, [[0.5]], atol=1e-15)
        np.testing.assert_allclose(c, [0.0], atol=1e-15)
        np.testing.assert_allclose(sigma, [[1.0]], atol=1e-15)

    def test_deterministic(self):
        h, c, sigma = gaussian_lmmse(GaussianModel([1.0, -2.0], np.zeros((2, 2)), [[1.0, 2.0]]))
        np.testing.assert_allclose(h, 0.0, atol=1e-15)
        np.testing.assert_allclose(c, [1.0, -2.0], atol=1e-15)
        np.testing.assert_allclose(sigma, 0.0, atol=1e-15)

    def test_scaled(self):
        h, c, sigma = gaussian_lmmse(GaussianModel([1.0], [[1.0]], [[2.0]]))
        np.testing.assert_allclose(h, [[0.4]], atol=1e-15)
        np.testing.assert_allclose(c, [0.2], atol=1e-15)
        np.testing.assert_allclose(sigma, [[4.0]], atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_sigma_is_akat(self, seed):
        model = random_gaussian_model(substream(seed, 0))
        _, _, sigma = gaussian_lmmse(model)
        a = model.a_matrix
        np.testing.assert_allclose(sigma, a @ model.k_matrix @ a.T, atol=1e-8)
        assert np.max(np.abs(sigma - sigma.T)) <= 1e-10
        assert np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))) >= -1e-10


class TestSingularValues:
    def test_identity(self):
        assert operator_norm(np.eye(3)) == pytest.approx(1.0, abs=1e-14)
        assert sigma_min(np.eye(3)) == pytest.approx(1.0, abs=1e-14)

    def test_diagonal(self):
        assert operator_norm(np.diag([2.0, 0.5])) == pytest.approx(2.0, rel=1e-12)
        assert sigma_min(np.diag([2.0, 0.5])) == pytest.approx(0.5, rel=1e-12)

    def test_shear(self):
        m = [[1.0, 1.0], [0.0, 1.0]]
        assert operator_norm(m) == pytest.approx(GOLDEN, rel=1e-12)
        assert sigma_min(m) == pytest.approx(GOLDEN - 1, rel=1e-12)

    def test_rectangular(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_allclose(singular_values(m), np.linalg.svd(m, compute_uv=False), rtol=1e-10)

    @given(st.integers(0, 10_000), st.integers(1, 6))
    def test_inverse_relation(self, seed, n):
        m = substream(seed, 0).normal(size=(n, n)) + 3 * np.eye(n)
        inv = np.linalg.inv(m)
        assert operator_norm(m) * operator_norm(inv) >= 1 - 1e-12
        assert sigma_min(m) == pytest.approx(1 / operator_norm(inv), rel=1e-8)
        np.testing.assert_allclose(singular_values(m), np.linalg.svd(m, compute_uv=False), rtol=1e-10)


def test_discrete_cme_matches_bayes():
    prior = DiscretePrior([[-1.0], [1.0]], [0.5, 0.5], signed=True)
    y = np.array([[0.3], [-2.0]])
    np.testing.assert_allclose(cme_gaussian_discrete(prior, np.array([[1.0]]), y)[:, 0], np.tanh(y[:, 0]), atol=1e-14)


def test_regression_recovers_lmmse():
    model = GaussianModel([0.5, -1.0], [[2.0, 0.3], [0.3, 1.0]], [[1.0, 0.5], [0.0, 1.0]])
    fit = regress_cme(model, MonteCarloConfig(seed=21, samples=200_000))
    h, c, _ = gaussian_lmmse(model)
    assert np.all(np.abs(fit.h_hat - h) < 4 * fit.h_se)
    assert np.all(np.abs(fit.c_hat - c) < 4 * fit.c_se)


class TestGaussianStabilityBound:
    def test_exact_gaussian(self):
        model = GaussianModel([0.0], [[1.0]], [[1.0]])
        rep = check_theorem4(model, None, default_char_grid(1, 9), MonteCarloConfig(seed=1, samples=10_000))
        assert rep.holds and rep.epsilon_hat == 0.0
        assert rep.lhs_sup_on_grid <= 1e-15
        assert rep.extra["output_bound"]["kind"] == "uniform"
        assert rep.extra["input_bound"]["kind"] == "pointwise"

    @pytest.mark.parametrize("seed", range(1, 21))
    def test_two_point(self, seed):
        prior = DiscretePrior([-1.0, 1.0], [0.5, 0.5], signed=True)
        model = GaussianModel.moment_matched(prior, [[1.0]])
        rep = check_theorem4(model, prior, default_char_grid(1, 21), MonteCarloConfig(seed=seed, samples=50_000))
        assert rep.holds
        assert rep.extra["output_bound"]["holds"] and rep.extra["input_bound"]["holds"]

    def test_input_rhs_grows(self):
        prior = DiscretePrior([-1.0, 1.0], [0.5, 0.5], signed=True)
        model = GaussianModel.moment_matched(prior, [[1.0]])
        rep = check_theorem4(model, prior, default_char_grid(1, 9), MonteCarloConfig(seed=1, samples=10_000))
        pts = [p for p in rep.extra["input_bound"]["per_point"] if p["t"][0] > 0]
        rhs = [p["rhs"] for p in pts]
        assert rhs == sorted(rhs) and rhs[-1] > 1e100

    def test_grid_dimension(self):
        model = GaussianModel([0.0], [[1.0]], [[1.0], [2.0]])
        with pytest.raises(DomainError):
            check_theorem4(model, None, default_char_grid(1, 3), MonteCarloConfig(seed=1, samples=10_000))
