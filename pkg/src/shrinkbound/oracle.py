"""Brute-force reference computations: a dense prior-probability grid and a
seeded Monte-Carlo sampler.

Both work from the model definition directly rather than through
``model``/``posterior``, so they can be used to check those modules.
"""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np

from .errors import DomainError
from .priors import HeterogeneityPrior
from .schemas import Dataset, MonteCarloTheta, OracleEstimate, Study

logger = logging.getLogger(__name__)

MIN_GRID_SIZE = 10_000
MIN_SAMPLES = 100_000
MIN_EFFECTIVE_SAMPLES = 100
BATCHES = 50


class OracleWarning(UserWarning):
    """The Monte-Carlo oracle has too few effective samples to be trusted."""


def _log_marginal_likelihood(y: np.ndarray, sigma2: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """log p(y | tau) with mu integrated out under a flat prior, up to a constant."""
    var = sigma2[None, :] + (tau * tau)[:, None]
    prec = 1.0 / var
    prec_sum = prec.sum(axis=1)
    mu_hat = (prec * y).sum(axis=1) / prec_sum
    q = (prec * (y[None, :] - mu_hat[:, None]) ** 2).sum(axis=1)
    return -0.5 * (np.log(var).sum(axis=1) + np.log(prec_sum) + q)


def _importance_weights(log_lik: np.ndarray) -> np.ndarray:
    w = np.exp(log_lik - log_lik.max())
    return w / w.sum()


def grid_expected_weight(
    dataset: Dataset,
    prior: HeterogeneityPrior,
    i: int,
    j: int,
    grid_size: int = 1_000_000,
) -> OracleEstimate:
    """E[c_ij | y] as a likelihood-weighted average over tau = F^-1(u).

    u runs over a midpoint grid on (0, 1), so every cell carries the same
    prior probability and the prior density drops out of the weights.
    """
    if grid_size < MIN_GRID_SIZE:
        raise DomainError(f"grid_size must be at least {MIN_GRID_SIZE}, got {grid_size}")
    for idx in (i, j):
        if not 0 <= idx < dataset.k:
            raise DomainError(f"study index {idx + 1} out of range 1..{dataset.k}")
    u = (np.arange(grid_size) + 0.5) / grid_size
    tau = np.asarray(prior.quantile(u), dtype=float)
    sigma2 = dataset.sigma2
    p = _importance_weights(_log_marginal_likelihood(dataset.y, sigma2, tau))

    t2 = tau * tau
    prec = 1.0 / (sigma2[None, :] + t2[:, None])
    w_i = prec[:, i] / prec.sum(axis=1)
    b_j = t2 / (sigma2[j] + t2)
    c_ij = (1.0 - b_j) * w_i + (b_j if i == j else 0.0)
    value = float(p @ c_ij)
    logger.debug("grid oracle: E[c_%d%d] = %.6f on %d points", i + 1, j + 1, value, grid_size)
    return OracleEstimate(value=value, method="grid", size=grid_size)


def _weighted_quantile(x: np.ndarray, w: np.ndarray, p: float) -> float:
    order = np.argsort(x)
    cum = np.cumsum(w[order])
    cum -= 0.5 * w[order]
    return float(np.interp(p * cum[-1], cum, x[order]))


def _weighted_stats(theta: np.ndarray, w: np.ndarray, level: float) -> np.ndarray:
    w = w / w.sum()
    mean = float(w @ theta)
    sd = math.sqrt(max(float(w @ (theta - mean) ** 2), 0.0))
    tail = 0.5 * (1.0 - level)
    return np.array(
        [mean, sd, _weighted_quantile(theta, w, tail), _weighted_quantile(theta, w, 1.0 - tail)]
    )


def mc_theta_distribution(
    data: Dataset | Study,
    prior: HeterogeneityPrior,
    j: int = 0,
    n_samples: int = 1_000_000,
    seed: int = 20240101,
    level: float = 0.95,
) -> MonteCarloTheta:
    """Sample theta_j from its marginal posterior by importance sampling.

    tau is drawn from the prior by CDF inversion and weighted by its marginal
    likelihood; mu and then theta_j are drawn from their conditional normals.
    Standard errors come from batch means over ``BATCHES`` contiguous batches.
    The generator is PCG64, so results are reproducible per seed.
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    if not 0 < level < 1:
        raise DomainError(f"credible level must lie in (0, 1), got {level!r}")
    rng = np.random.Generator(np.random.PCG64(seed))

    if isinstance(data, Study):
        if j != 0:
            raise DomainError(f"study index {j + 1} out of range 1..1")
        # one study: theta | y ~ N(y, sigma^2) whatever tau is
        theta = data.y + data.sigma * rng.standard_normal(n_samples)
        weights = np.ones(n_samples)
    else:
        if not 0 <= j < data.k:
            raise DomainError(f"study index {j + 1} out of range 1..{data.k}")
        y, sigma2 = data.y, data.sigma2
        tau = np.asarray(prior.quantile(rng.random(n_samples)), dtype=float)
        weights = _importance_weights(_log_marginal_likelihood(y, sigma2, tau))

        t2 = tau * tau
        prec = 1.0 / (sigma2[None, :] + t2[:, None])
        mu_var = 1.0 / prec.sum(axis=1)
        mu = (prec @ y) * mu_var + np.sqrt(mu_var) * rng.standard_normal(n_samples)
        b = t2 / (sigma2[j] + t2)
        theta = b * y[j] + (1.0 - b) * mu + np.sqrt(sigma2[j] * b) * rng.standard_normal(n_samples)

    ess = float(weights.sum() ** 2 / (weights**2).sum())
    if ess < MIN_EFFECTIVE_SAMPLES:
        logger.warning("Monte-Carlo oracle: effective sample size %.1f of %d", ess, n_samples)
        warnings.warn(
            f"effective sample size {ess:.1f} is below {MIN_EFFECTIVE_SAMPLES}",
            OracleWarning,
            stacklevel=2,
        )

    overall = _weighted_stats(theta, weights, level)
    per_batch = np.array(
        [
            _weighted_stats(t, w, level)
            for t, w in zip(np.array_split(theta, BATCHES), np.array_split(weights, BATCHES))
            if w.sum() > 0
        ]
    )
    if len(per_batch) > 1:
        errors = per_batch.std(axis=0, ddof=1) / math.sqrt(len(per_batch))
    else:
        errors = np.full(4, math.inf)

    def est(k: int) -> OracleEstimate:
        return OracleEstimate(
            value=float(overall[k]),
            mc_std_error=float(errors[k]),
            method="monte-carlo",
            size=n_samples,
            seed=seed,
        )

    return MonteCarloTheta(
        index=j + 1,
        mean=est(0),
        sd=est(1),
        lo=est(2),
        hi=est(3),
        level=level,
        effective_sample_size=ess,
    )
