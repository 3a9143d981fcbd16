import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poisson_cme.conjugacy import (
    LAPLACE_GRID,
    NotRealizable,
    corollary_check,
    estimator_of_prior,
    posterior,
    posterior_mean,
    prior_of_estimator,
    theorem1_laplace_check,
)
from poisson_cme.core import DomainError, GammaProductPrior, LinearEstimator, PoissonChannel
from poisson_cme.montecarlo import MonteCarloConfig, map_chunks, sample_prior

from .conftest import gamma_priors


class TestEstimatorOfPrior:
    def test_exponential(self, exp3):
        est = estimator_of_prior(exp3)
        np.testing.assert_allclose(est.h_matrix, [[0.25]], atol=1e-15)
        np.testing.assert_allclose(est.offset, [0.25], atol=1e-15)

    def test_shape_two(self):
        est = estimator_of_prior(GammaProductPrior.from_arrays([2.0], [3.0]))
        np.testing.assert_allclose(est.offset, [0.5], atol=1e-15)

    def test_two_dim(self):
        est = estimator_of_prior(GammaProductPrior.from_arrays([1.0, 2.0], [1.0, 3.0]))
        np.testing.assert_allclose(est.h_matrix, np.diag([0.5, 0.25]), atol=1e-15)
        np.testing.assert_allclose(est.offset, [0.5, 0.5], atol=1e-15)

    @given(gamma_priors())
    def test_range(self, prior):
        est = estimator_of_prior(prior)
        d = np.diag(est.h_matrix)
        assert np.all((d > 0) & (d < 1)) and np.all(est.offset > 0)


class TestPriorOfEstimator:
    def test_inverse(self):
        prior = prior_of_estimator(LinearEstimator([[0.25]], [0.25]))
        assert prior.shape[0] == pytest.approx(1.0, abs=1e-12)
        assert prior.rate[0] == pytest.approx(3.0, abs=1e-12)

    @pytest.mark.parametrize(
        "h,c,reason",
        [
            ([[0.5, 0.1], [0.0, 0.5]], [1.0, 1.0], "off_diagonal"),
            ([[1.0]], [1.0], "gain_out_of_range"),
            ([[0.0]], [1.0], "gain_out_of_range"),
            ([[0.5]], [0.0], "nonpositive_offset"),
        ],
    )
    def test_not_realizable(self, h, c, reason):
        with pytest.raises(NotRealizable) as info:
            prior_of_estimator(LinearEstimator(h, c))
        assert info.value.reason == reason

    def test_tolerance_boundary(self):
        prior_of_estimator(LinearEstimator([[0.5, 1e-13], [0.0, 0.5]], [1.0, 1.0]))
        with pytest.raises(NotRealizable):
            prior_of_estimator(LinearEstimator([[0.5, 1e-11], [0.0, 0.5]], [1.0, 1.0]))

    @given(gamma_priors())
    def test_round_trip(self, prior):
        back = prior_of_estimator(estimator_of_prior(prior))
        np.testing.assert_allclose(back.shape, prior.shape, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(back.rate, prior.rate, rtol=1e-12, atol=1e-12)


class TestPosterior:
    def test_zero_count(self, exp3):
        post = posterior(exp3, [0])
        assert (post.shape[0], post.rate[0]) == (1.0, 4.0)
        assert post.mean()[0] == 0.25

    def test_three_counts(self, exp3):
        post = posterior(exp3, [3])
        assert (post.shape[0], post.rate[0]) == (4.0, 4.0)
        assert post.mean()[0] == 1.0

    def test_negative_counts(self, exp3):
        with pytest.raises(DomainError):
            posterior(exp3, [-1])

    @given(gamma_priors())
    def test_linear_exactly(self, prior):
        est = estimator_of_prior(prior)
        assert np.allclose(posterior_mean(prior, np.zeros(prior.dim)), est.offset, rtol=0, atol=1e-12)
        for y in itertools.product(range(7), repeat=prior.dim):
            np.testing.assert_allclose(posterior(prior, y).mean(), est(y), rtol=0, atol=1e-12)


class TestRealizability:
    def test_dark_current_fails(self):
        rep = corollary_check(PoissonChannel([[1.0]], [1.0]), [[0.25]], [0.25])
        assert not rep.verdict and rep.failed == ["dark_current_nonzero"]
        assert rep.prior is None

    def test_identity_channel(self):
        rep = corollary_check(PoissonChannel([[1.0]], [0.0]), [[0.25]], [0.25])
        assert rep.verdict
        assert rep.prior.shape[0] == pytest.approx(1.0) and rep.prior.rate[0] == pytest.approx(3.0)

    def test_fat_channel(self):
        rep = corollary_check(PoissonChannel([[1.0, 1.0]], [0.0]), [[0.2], [0.2]], [0.2, 0.2])
        assert rep.verdict
        assert rep.prior.shape[0] == pytest.approx(1.0, abs=1e-12)
        assert rep.prior.rate[0] == pytest.approx(1.5, abs=1e-12)

    def test_lists_every_failure(self):
        ch = PoissonChannel(np.eye(2), [1.0, 0.0])
        rep = corollary_check(ch, [[0.5, 0.1], [0.0, 1.5]], [-1.0, 1.0])
        assert set(rep.failed) == {
            "dark_current_nonzero",
            "off_diagonal",
            "gain_out_of_range",
            "nonpositive_offset",
        }

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            corollary_check(PoissonChannel([[1.0]], [0.0]), [[0.25, 0.1]], [0.25])

    @given(st.floats(0.1, 10), st.floats(0.05, 0.95), st.floats(0.05, 5))
    def test_rescaling_recomputed(self, scale, gain, offset):
        # E[X|Y] = C y + b for A; for D A the same X needs C / D and the prior on
        # D A X is the old prior on A X scaled by D.
        base = corollary_check(PoissonChannel([[1.0]], [0.0]), [[gain]], [offset])
        scaled = corollary_check(PoissonChannel([[scale]], [0.0]), [[gain / scale]], [offset])
        assert base.verdict == scaled.verdict
        assert scaled.prior.shape[0] == pytest.approx(base.prior.shape[0] * scale, rel=1e-12)
        assert scaled.prior.rate[0] == pytest.approx(base.prior.rate[0], rel=1e-12)


class TestLaplaceCheck:
    @pytest.mark.parametrize("shape", [1.0, 2.0])
    def test_exponent_c_over_h(self, shape):
        assert theorem1_laplace_check(GammaProductPrior.from_arrays([shape], [3.0])) <= 1e-12

    def test_trivial_grid(self, exp3):
        assert theorem1_laplace_check(exp3, grid=(0.0,)) == 0.0

    def test_printed_exponent_fails_mc(self):
        # Monte Carlo Laplace transform of Gamma(2, 3) at s = 1 separates the
        # exponent c/h = 2 from its reciprocal.
        prior = GammaProductPrior.from_arrays([2.0], [3.0])
        est = estimator_of_prior(prior)
        h, c = est.h_matrix[0, 0], est.offset[0]
        mc = MonteCarloConfig(seed=3, samples=200_000)
        draws = np.concatenate(map_chunks(lambda rng, n: sample_prior(prior, rng, n), mc))[:, 0]
        mc_val = np.exp(-draws).mean()
        se = np.exp(-draws).std() / np.sqrt(draws.size)
        base = 1.0 + h / (1.0 - h)
        assert abs(base ** (-c / h) - mc_val) < 4 * se
        assert abs(base ** (-h / c) - mc_val) > 50 * se

    @given(gamma_priors(max_dim=2))
    def test_random(self, prior):
        assert theorem1_laplace_check(prior, LAPLACE_GRID) <= 1e-12


def test_monte_carlo_conjugacy(exp3):
    """Empirical E[U | Y=y] at well-populated y sits within 4 standard errors of H y + c."""
    mc = MonteCarloConfig(seed=11, samples=400_000)

    def draw(rng, size):
        u = sample_prior(exp3, rng, size)[:, 0]
        return u, rng.poisson(u)

    parts = map_chunks(draw, mc)
    u = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    est = estimator_of_prior(exp3)
    checked = 0
    for k in np.unique(y):
        sel = u[y == k]
        if sel.size < 10_000:
            continue
        checked += 1
        se = sel.std(ddof=1) / np.sqrt(sel.size)
        assert abs(sel.mean() - est([k])[0]) < 4 * se
    assert checked >= 2
