from __future__ import annotations

import math

import numpy as np
import pytest

from shrinkbound.errors import DomainError, UnsupportedError
from shrinkbound.model import (
    conditional_grid,
    conditional_mu,
    conditional_state,
    conditional_theta,
    g_term,
    iv_weights,
    shrink_b,
    shrink_matrix,
    tau_log_posterior_unnorm,
)
from shrinkbound.priors import HeterogeneityPrior
from shrinkbound.schemas import Dataset

CJD = Dataset.from_arrays([-0.499, -0.173], [0.249, 0.631], ["observational", "randomized"])


def random_instances(count: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    for n in range(count):
        k = (2, 3, 5)[n % 3]
        sigma = np.exp(rng.uniform(math.log(0.05), math.log(2.0), size=k))
        y = rng.normal(0.0, 1.0, size=k)
        yield Dataset.from_arrays(y, sigma)


class TestIvWeights:
    def test_fe_weights_at_zero(self):
        w = iv_weights(CJD, 0.0)
        assert w[1] == pytest.approx(0.249**2 / (0.249**2 + 0.631**2), abs=1e-15)
        assert w.sum() == pytest.approx(1.0, abs=1e-15)

    def test_one_seventeenth(self):
        ds = Dataset.from_arrays([0.0, 0.0], [0.8, 0.2])
        assert iv_weights(ds, 0.0)[0] == pytest.approx(1 / 17, abs=1e-12)

    def test_equal_weights_at_large_tau(self):
        for ds in random_instances(12):
            w = iv_weights(ds, 1e6 * ds.sigma.max())
            assert np.max(np.abs(w - 1.0 / ds.k)) < 1e-6

    def test_rejects_negative_tau(self):
        with pytest.raises(DomainError):
            iv_weights(CJD, -0.1)

    def test_rejects_nan_tau(self):
        with pytest.raises(DomainError):
            iv_weights(CJD, float("nan"))


class TestShrinkage:
    def test_b_is_exactly_zero_at_zero(self):
        assert shrink_b(0.3, 0.0) == 0.0

    def test_b_value(self):
        assert shrink_b(1.0, 1.0) == pytest.approx(0.5)

    def test_b_rejects_bad_sigma(self):
        with pytest.raises(DomainError):
            shrink_b(0.0, 1.0)

    def test_columns_sum_to_one(self):
        for ds in random_instances(9):
            for tau in (0.0, 0.1, 1.0, 30.0):
                c = shrink_matrix(ds, tau)
                np.testing.assert_allclose(c.sum(axis=0), 1.0, atol=1e-12)
                assert np.all(c >= 0)

    def test_diagonal_at_zero_is_fe_weight(self):
        c = shrink_matrix(CJD, 0.0)
        np.testing.assert_allclose(np.diag(c), iv_weights(CJD, 0.0), atol=1e-15)

    def test_self_weight_monotone_in_tau(self):
        for ds in random_instances(15):
            taus = np.geomspace(1e-4, 1e3, 64) * ds.sigma.max()
            g = conditional_grid(ds, taus)
            diag = np.diagonal(g.shrink_c, axis1=1, axis2=2)
            assert np.all(np.diff(diag, axis=0) >= -1e-12)

    def test_self_weight_tends_to_one(self):
        c = shrink_matrix(CJD, 1e5)
        np.testing.assert_allclose(np.diag(c), 1.0, atol=1e-8)


class TestConditionalMoments:
    def test_theta_at_zero_is_fe_estimate(self):
        for ds in random_instances(9):
            fe = float(iv_weights(ds, 0.0) @ ds.y)
            for j in range(ds.k):
                mean, var = conditional_theta(ds, j, 0.0)
                assert mean == pytest.approx(fe, abs=1e-12)
                assert var == pytest.approx(1.0 / np.sum(1.0 / ds.sigma2), rel=1e-12)

    def test_theta_mean_is_weighted_sum(self):
        state = conditional_state(CJD, 0.4)
        np.testing.assert_allclose(state.shrink_c.T @ CJD.y, state.theta_cond_mean, atol=1e-14)

    def test_theta_tends_to_own_estimate(self):
        mean, var = conditional_theta(CJD, 1, 1e6)
        assert mean == pytest.approx(-0.173, abs=1e-9)
        assert var == pytest.approx(0.631**2, rel=1e-6)

    def test_mu_variance(self):
        _, var = conditional_mu(CJD, 0.5)
        assert var == pytest.approx(1.0 / np.sum(1.0 / (CJD.sigma2 + 0.25)))

    def test_grid_matches_state(self):
        g = conditional_grid(CJD, [0.0, 0.3, 2.0])
        for n, tau in enumerate([0.0, 0.3, 2.0]):
            s = conditional_state(CJD, tau)
            np.testing.assert_allclose(g.shrink_c[n], s.shrink_c)
            assert g.mu_mean[n] == pytest.approx(s.mu_cond_mean)

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            conditional_theta(CJD, 2, 0.1)


class TestLogPosterior:
    def test_two_study_reduction(self):
        prior = HeterogeneityPrior.half_normal(0.5)
        taus = np.linspace(0.0, 3.0, 256)
        s2 = CJD.sigma2
        delta = CJD.y[1] - CJD.y[0]
        total = s2[0] + s2[1] + 2 * taus**2
        expected = prior.logpdf(taus) - 0.5 * np.log(total) - 0.5 * delta**2 / total
        got = tau_log_posterior_unnorm(CJD, prior, taus)
        diff = got - expected
        assert np.max(np.abs(diff - diff[0])) < 1e-10

    def test_g_term_matches_likelihood_ratio(self):
        prior = HeterogeneityPrior.half_normal(1.0)
        coincident = CJD.with_y([0.0, 0.0])
        for tau in (0.0, 0.2, 1.5):
            ratio = math.exp(
                tau_log_posterior_unnorm(CJD, prior, tau) - tau_log_posterior_unnorm(coincident, prior, tau)
            )
            assert ratio == pytest.approx(g_term(CJD, tau), rel=1e-12)

    def test_g_term_needs_two_studies(self):
        ds = Dataset.from_arrays([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
        with pytest.raises(UnsupportedError):
            g_term(ds, 0.5)

    def test_scalar_in_scalar_out(self):
        prior = HeterogeneityPrior.half_normal(0.5)
        assert isinstance(tau_log_posterior_unnorm(CJD, prior, 0.3), float)

    def test_outside_uniform_support(self):
        prior = HeterogeneityPrior.uniform(1.0)
        assert tau_log_posterior_unnorm(CJD, prior, 2.0) == -math.inf
