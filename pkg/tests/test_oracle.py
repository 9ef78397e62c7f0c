from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from shrinkbound.bounds import coincidence_weights, fe_weights
from shrinkbound.errors import DomainError
from shrinkbound.oracle import OracleWarning, grid_expected_weight, mc_theta_distribution
from shrinkbound.posterior import fit_cached, marginal_theta
from shrinkbound.priors import HeterogeneityPrior
from shrinkbound.schemas import Dataset, Study

CJD = Dataset.from_arrays([-0.499, -0.173], [0.249, 0.631], ["observational", "randomized"])
ACIDOSIS = Dataset.from_arrays([-0.764, -0.401], [0.313, 0.287], ["Amer-Wahlin 2001", "Westerhuis 2007"])
HN05 = HeterogeneityPrior.half_normal(0.5)


def random_datasets(count: int, seed: int = 3):
    rng = np.random.default_rng(seed)
    for n in range(count):
        k = (2, 3, 5)[n % 3]
        sigma = np.exp(rng.uniform(math.log(0.05), math.log(2.0), size=k))
        yield Dataset.from_arrays(rng.normal(0.0, 0.5, size=k), sigma)


class TestValidation:
    def test_grid_size_floor(self):
        with pytest.raises(DomainError):
            grid_expected_weight(CJD, HN05, 0, 0, grid_size=100)

    def test_sample_floor(self):
        with pytest.raises(DomainError):
            mc_theta_distribution(CJD, HN05, 0, n_samples=1000)

    def test_index_range(self):
        with pytest.raises(DomainError):
            grid_expected_weight(CJD, HN05, 0, 2, grid_size=10_000)

    def test_seed_reproducible(self):
        a = mc_theta_distribution(CJD, HN05, 1, n_samples=100_000, seed=5)
        b = mc_theta_distribution(CJD, HN05, 1, n_samples=100_000, seed=5)
        assert a.mean.value == b.mean.value
        assert a.mean.seed == 5
        assert a.mean.mc_std_error > 0

    def test_grid_estimate_has_no_mc_error(self):
        est = grid_expected_weight(CJD, HN05, 1, 1, grid_size=10_000)
        assert est.mc_std_error == 0.0
        assert est.method == "grid"


class TestSmallCases:
    def test_near_zero_heterogeneity_gives_fe_weight(self):
        est = grid_expected_weight(CJD, HeterogeneityPrior.uniform(1e-6), 1, 1, grid_size=10_000)
        assert est.value == pytest.approx(fe_weights(CJD.sigma)[1], abs=1e-4)

    def test_coincident_data_matches_bound(self):
        coincident = CJD.with_y([0.0, 0.0])
        est = grid_expected_weight(coincident, HN05, 1, 1, grid_size=100_000)
        assert est.value == pytest.approx(coincidence_weights(CJD.sigma, HN05)[1], abs=1e-4)

    def test_single_study_is_normal(self):
        mc = mc_theta_distribution(Study(label="only", y=-0.173, sigma=0.631), HN05, n_samples=200_000, seed=1)
        assert mc.mean.value == pytest.approx(-0.173, abs=4 * mc.mean.mc_std_error)
        assert mc.sd.value == pytest.approx(0.631, abs=4 * mc.sd.mc_std_error)
        assert mc.effective_sample_size == pytest.approx(200_000)

    def test_low_effective_sample_size_warns(self):
        # data far in the prior tail: almost all draws get negligible weight
        ds = Dataset.from_arrays([-40.0, 40.0], [0.01, 0.01])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            mc_theta_distribution(ds, HeterogeneityPrior.half_normal(0.01), 0, n_samples=100_000, seed=2)
        assert any(issubclass(w.category, OracleWarning) for w in caught)


@pytest.mark.slow
class TestEquivalence:
    @pytest.mark.parametrize("dataset", [CJD, ACIDOSIS], ids=["cjd", "acidosis"])
    def test_grid_matches_quadrature(self, dataset):
        c = fit_cached(dataset, HN05).moments.shrink_c
        for i in range(dataset.k):
            for j in range(dataset.k):
                est = grid_expected_weight(dataset, HN05, i, j)
                assert est.value == pytest.approx(c[i, j], abs=1e-4)

    @pytest.mark.parametrize("dataset", [CJD, ACIDOSIS], ids=["cjd", "acidosis"])
    def test_monte_carlo_matches_quadrature(self, dataset):
        tp = fit_cached(dataset, HN05)
        summary = marginal_theta(tp, 1, 0.95, "central")
        mc = mc_theta_distribution(dataset, HN05, 1, seed=11)
        assert abs(mc.mean.value - summary.mean) <= 3 * mc.mean.mc_std_error
        assert abs(mc.sd.value - summary.sd) <= 4 * mc.sd.mc_std_error
        assert abs(mc.lo.value - summary.lo) <= 4 * mc.lo.mc_std_error
        assert abs(mc.hi.value - summary.hi) <= 4 * mc.hi.mc_std_error

    def test_cjd_published_mean(self):
        mc = mc_theta_distribution(CJD, HN05, 1, seed=23)
        assert abs(mc.mean.value - (-0.370)) <= 3 * mc.mean.mc_std_error + 0.005

    def test_randomized_instances(self):
        for n, ds in enumerate(random_datasets(10)):
            tp = fit_cached(ds, HN05)
            est = grid_expected_weight(ds, HN05, 0, 0)
            assert est.value == pytest.approx(tp.moments.shrink_c[0, 0], abs=1e-4)
            mc = mc_theta_distribution(ds, HN05, 0, n_samples=200_000, seed=100 + n)
            assert abs(mc.mean.value - tp.moments.theta_mean[0]) <= 4 * mc.mean.mc_std_error
