"""Closed-form kernels of the normal-normal hierarchical model given tau.

All weights are indexed so that ``c[i, j]`` is the weight of study i's
estimate in study j's shrinkage estimate; every column of ``c`` sums to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedError
from .priors import HeterogeneityPrior
from .schemas import Dataset


@dataclass(frozen=True)
class ConditionalState:
    tau: float
    mu_cond_mean: float
    mu_cond_var: float
    iv_weights: np.ndarray
    shrink_b: np.ndarray
    shrink_c: np.ndarray
    theta_cond_mean: np.ndarray
    theta_cond_var: np.ndarray


def _check_tau(tau: float) -> float:
    try:
        tau = float(tau)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"tau must be a real number, got {tau!r}") from exc
    if not math.isfinite(tau) or tau < 0:
        raise DomainError(f"tau must be finite and nonnegative, got {tau!r}")
    return tau


def _check_index(dataset: Dataset, j: int) -> None:
    if not 0 <= j < dataset.k:
        raise DomainError(f"study index {j + 1} out of range 1..{dataset.k}")


def iv_weights(dataset: Dataset, tau: float) -> np.ndarray:
    tau = _check_tau(tau)
    prec = 1.0 / (dataset.sigma2 + tau * tau)
    return prec / prec.sum()


def conditional_mu(dataset: Dataset, tau: float) -> tuple[float, float]:
    """Mean and variance of mu given tau under a uniform effect prior."""
    tau = _check_tau(tau)
    prec = 1.0 / (dataset.sigma2 + tau * tau)
    total = prec.sum()
    return float(prec @ dataset.y / total), float(1.0 / total)


def shrink_b(sigma_j: float, tau: float) -> float:
    if not (math.isfinite(sigma_j) and sigma_j > 0):
        raise DomainError(f"sigma must be positive and finite, got {sigma_j!r}")
    tau = _check_tau(tau)
    if tau == 0.0:
        return 0.0
    return tau * tau / (sigma_j * sigma_j + tau * tau)


def _shrink_b_vec(sigma2: np.ndarray, tau: float) -> np.ndarray:
    t2 = tau * tau
    return t2 / (sigma2 + t2)


def _c_matrix(w: np.ndarray, b: np.ndarray) -> np.ndarray:
    c = np.outer(w, 1.0 - b)
    c[np.diag_indices_from(c)] += b
    return c


def shrink_matrix(dataset: Dataset, tau: float) -> np.ndarray:
    w = iv_weights(dataset, tau)
    return _c_matrix(w, _shrink_b_vec(dataset.sigma2, float(tau)))


def conditional_theta(dataset: Dataset, j: int, tau: float) -> tuple[float, float]:
    """Mean and variance of theta_j given tau (j is 0-based)."""
    _check_index(dataset, j)
    state = conditional_state(dataset, tau)
    return float(state.theta_cond_mean[j]), float(state.theta_cond_var[j])


@dataclass(frozen=True)
class ConditionalGrid:
    """Conditional quantities evaluated on a vector of tau values.

    Arrays are indexed ``[n]``, ``[n, k]`` or ``[n, i, j]`` over the grid.
    """

    tau: np.ndarray
    mu_mean: np.ndarray
    mu_var: np.ndarray
    iv_weights: np.ndarray
    shrink_b: np.ndarray
    shrink_c: np.ndarray
    theta_mean: np.ndarray
    theta_var: np.ndarray


def conditional_grid(dataset: Dataset, taus) -> ConditionalGrid:
    t = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("tau must be finite and nonnegative")
    s2 = dataset.sigma2
    y = dataset.y
    t2 = (t * t)[:, None]
    prec = 1.0 / (s2 + t2)
    v_mu = 1.0 / prec.sum(axis=1)
    w = prec * v_mu[:, None]
    m_mu = w @ y
    b = t2 / (s2 + t2)
    c = w[:, :, None] * (1.0 - b)[:, None, :]
    diag = np.arange(dataset.k)
    c[:, diag, diag] += b
    # (sigma^-2 + tau^-2)^-1 written without the removable singularity at tau = 0
    within = s2 * t2 / (s2 + t2)
    return ConditionalGrid(
        tau=t,
        mu_mean=m_mu,
        mu_var=v_mu,
        iv_weights=w,
        shrink_b=b,
        shrink_c=c,
        theta_mean=b * y + (1.0 - b) * m_mu[:, None],
        theta_var=(1.0 - b) ** 2 * v_mu[:, None] + within,
    )


def conditional_state(dataset: Dataset, tau: float) -> ConditionalState:
    tau = _check_tau(tau)
    g = conditional_grid(dataset, [tau])
    return ConditionalState(
        tau=tau,
        mu_cond_mean=float(g.mu_mean[0]),
        mu_cond_var=float(g.mu_var[0]),
        iv_weights=g.iv_weights[0],
        shrink_b=g.shrink_b[0],
        shrink_c=g.shrink_c[0],
        theta_cond_mean=g.theta_mean[0],
        theta_cond_var=g.theta_var[0],
    )


def g_term(dataset: Dataset, tau: float) -> float:
    if dataset.k != 2:
        raise UnsupportedError(f"g_term is defined for k = 2 only, got k = {dataset.k}")
    tau = _check_tau(tau)
    s2 = dataset.sigma2
    delta = dataset.y[1] - dataset.y[0]
    return math.exp(-0.5 * delta * delta / (s2[0] + s2[1] + 2 * tau * tau))


def tau_log_posterior_unnorm(dataset: Dataset, prior: HeterogeneityPrior, tau):
    """Log of p(tau) times the marginal likelihood of tau, up to a constant.

    Vectorized over ``tau``; -inf where the prior density vanishes.
    """
    t = np.asarray(tau, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("tau must be finite and nonnegative")
    s = dataset.sigma2 + (t * t)[..., None]
    prec = 1.0 / s
    total = prec.sum(axis=-1)
    mu = (prec * dataset.y).sum(axis=-1) / total
    resid = ((dataset.y - mu[..., None]) ** 2 * prec).sum(axis=-1)
    log_f = -0.5 * np.log(s).sum(axis=-1) - 0.5 * np.log(total)
    out = prior.logpdf(t) + log_f - 0.5 * resid
    return float(out) if out.ndim == 0 else out
