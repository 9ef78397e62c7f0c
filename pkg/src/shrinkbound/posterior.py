from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import optimize

from .cache import cache_key, posterior_cache
from .config import QuadratureSettings, load_settings
from .errors import ConvergenceError, DomainError, NumericalError
from .model import conditional_grid, tau_log_posterior_unnorm
from .priors import HeterogeneityPrior
from .quad import (
    NODES_PER_INTERVAL,
    bracket_quantile,
    find_root,
    integrate_full,
    node_rule,
    normal_cdf,
    normal_quantile,
)
from .schemas import (
    Dataset,
    IntervalKind,
    OverallSummary,
    ShrinkageResult,
    Study,
    TauSummary,
    ThetaSummary,
)

logger = logging.getLogger(__name__)

# Relative threshold below which the unnormalized posterior counts as tail.
TAIL_RATIO = 1e-12
_MAX_DOUBLINGS = 64
# Probability margin kept away from 0 and 1 when bracketing shortest intervals.
_EDGE_MASS = 1e-6


@dataclass(frozen=True)
class PosteriorMoments:
    """Posterior expectations over tau, all from one node rule."""

    iv_weights: np.ndarray
    shrink_c: np.ndarray
    mu_mean: float
    mu_var: float
    theta_mean: np.ndarray
    theta_var: np.ndarray
    tau_mean: float


@dataclass(frozen=True, eq=False)
class TauPosterior:
    """Normalized marginal posterior of tau on [0, tau_max].

    ``edges`` is the sorted adaptive partition found while normalizing and
    ``nodes``/``node_weights`` form a Gauss-Legendre rule over it
    (``NODES_PER_INTERVAL`` nodes per interval); ``node_weights`` sum to 1 and carry
    the posterior density.
    """

    dataset: Dataset
    prior: HeterogeneityPrior
    settings: QuadratureSettings
    log_norm_const: float
    tau_max: float
    edges: np.ndarray
    nodes: np.ndarray
    node_weights: np.ndarray

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.tau_max

    def log_unnorm(self, tau):
        return tau_log_posterior_unnorm(self.dataset, self.prior, tau)

    def logpdf(self, tau):
        return self.log_unnorm(tau) - self.log_norm_const

    def pdf(self, tau):
        return np.exp(self.logpdf(tau))

    @cached_property
    def _masses_left_right(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mass strictly left of / right of each partition interval."""
        per_interval = self.node_weights.reshape(len(self.edges) - 1, -1).sum(axis=1)
        left = np.concatenate(([0.0], np.cumsum(per_interval)[:-1]))
        right = np.concatenate((np.cumsum(per_interval[::-1])[::-1][1:], [0.0]))
        return left, right

    def _partial_mass(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        x, w = np.polynomial.legendre.leggauss(NODES_PER_INTERVAL)
        half = 0.5 * (b - a)
        pts = a[:, None] + half[:, None] * (x + 1.0)
        return half * (self.pdf(pts) @ w)

    def cdf(self, tau):
        """Posterior CDF of tau, vectorized over ``tau``.

        Whole partition intervals contribute their node-rule mass and the
        interval containing tau is split with a Gauss-Legendre rule on each
        side. The result is lower / (lower + upper), so both tails keep
        relative accuracy.
        """
        t_in = np.asarray(tau, dtype=float)
        t = np.clip(np.atleast_1d(t_in).ravel(), 0.0, self.tau_max)
        k = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.edges) - 2)
        left, right = self._masses_left_right
        lower = left[k] + self._partial_mass(self.edges[k], t)
        upper = right[k] + self._partial_mass(t, self.edges[k + 1])
        total = lower + upper
        out = np.where(total > 0, lower / np.where(total > 0, total, 1.0), 0.0)
        out = np.where(t >= self.tau_max, 1.0, out)
        return float(out[0]) if t_in.ndim == 0 else out.reshape(t_in.shape)

    def quantile(self, p: float) -> float:
        if not 0 < p < 1:
            raise DomainError(f"quantile probability must lie in (0, 1), got {p!r}")
        at_edges = self.cdf(self.edges)
        k = int(np.clip(np.searchsorted(at_edges, p) - 1, 0, len(self.edges) - 2))
        lo, hi = float(self.edges[k]), float(self.edges[k + 1])
        return find_root(lambda x: self.cdf(x) - p, lo, hi, tol=1e-12 * max(self.tau_max, 1.0))

    @cached_property
    def moments(self) -> PosteriorMoments:
        g = conditional_grid(self.dataset, self.nodes)
        p = self.node_weights
        mu_mean = float(p @ g.mu_mean)
        theta_mean = p @ g.theta_mean
        return PosteriorMoments(
            iv_weights=p @ g.iv_weights,
            shrink_c=np.tensordot(p, g.shrink_c, axes=(0, 0)),
            mu_mean=mu_mean,
            # law of total variance
            mu_var=float(p @ g.mu_var + p @ (g.mu_mean - mu_mean) ** 2),
            theta_mean=theta_mean,
            theta_var=p @ g.theta_var + p @ (g.theta_mean - theta_mean) ** 2,
            tau_mean=float(p @ self.nodes),
        )

    def theta_cdf(self, j: int) -> Callable[[float], float]:
        g = conditional_grid(self.dataset, self.nodes)
        return _mixture_cdf(self.node_weights, g.theta_mean[:, j], np.sqrt(g.theta_var[:, j]))

    def mu_cdf(self) -> Callable[[float], float]:
        g = conditional_grid(self.dataset, self.nodes)
        return _mixture_cdf(self.node_weights, g.mu_mean, np.sqrt(g.mu_var))


def _mixture_cdf(weights: np.ndarray, means: np.ndarray, sds: np.ndarray) -> Callable[[float], float]:
    def cdf(x: float) -> float:
        return float(weights @ normal_cdf((x - means) / sds))

    return cdf


# --- fitting ---


def _support_upper(dataset: Dataset, prior: HeterogeneityPrior, settings: QuadratureSettings) -> tuple[float, float]:
    """Upper integration limit and the log-density peak seen while finding it."""
    upper = float(prior.quantile(1.0 - settings.tail_mass_cutoff))
    if not (math.isfinite(upper) and upper > 0):
        raise NumericalError(f"prior {prior.describe()} has no usable upper quantile")
    floor = math.log(TAIL_RATIO)
    peak = -math.inf
    for _ in range(_MAX_DOUBLINGS):
        grid = np.concatenate((np.linspace(0.0, upper, 257), upper * np.geomspace(1e-6, 1.0, 64)))
        lp = tau_log_posterior_unnorm(dataset, prior, grid)
        finite = lp[np.isfinite(lp)]
        if finite.size:
            peak = max(peak, float(finite.max()))
        tail = tau_log_posterior_unnorm(dataset, prior, upper)
        if not math.isfinite(peak):
            raise NumericalError("posterior density vanishes on the whole prior support")
        if tail - peak < floor:
            break
        upper *= 2.0
    else:
        raise ConvergenceError(f"posterior tail still heavy at tau = {upper:g}", estimate=upper)
    return min(upper, prior.support_max), peak


def _breakpoints(dataset: Dataset, prior: HeterogeneityPrior, tau_max: float) -> np.ndarray:
    start = min(float(dataset.sigma.min()), tau_max) / 8.0
    count = max(2, int(math.ceil(math.log2(tau_max / start))) + 1)
    ladder = np.geomspace(start, tau_max, count)[:-1]
    # kinks of a tabulated density
    kinks = np.asarray(prior.grid, dtype=float)
    return np.union1d(ladder, kinks[(kinks > 0) & (kinks < tau_max)])


def fit_tau_posterior(
    dataset: Dataset,
    prior: HeterogeneityPrior,
    settings: QuadratureSettings | None = None,
) -> TauPosterior:
    settings = settings or load_settings()
    tau_max, peak = _support_upper(dataset, prior, settings)

    def scaled(tau: float) -> float:
        return math.exp(tau_log_posterior_unnorm(dataset, prior, tau) - peak)

    res = integrate_full(scaled, 0.0, tau_max, settings, points=_breakpoints(dataset, prior, tau_max))
    if not res.value > 0:
        raise NumericalError("posterior normalization constant is not positive")
    log_norm_const = peak + math.log(res.value)

    edges = np.append(np.sort(res.intervals[:, 0]), tau_max)
    nodes, gl_weights = node_rule(res.intervals)
    dens = np.exp(tau_log_posterior_unnorm(dataset, prior, nodes) - log_norm_const)
    mass = gl_weights * dens
    total = float(mass.sum())
    if abs(total - 1.0) > 1e-6:
        logger.warning("node rule carries posterior mass %.9f; renormalizing", total)
    logger.info(
        "fitted tau posterior: k=%d prior=%s tau_max=%.4g intervals=%d evals=%d",
        dataset.k,
        prior.describe(),
        tau_max,
        len(res.intervals),
        res.evaluations,
    )
    return TauPosterior(
        dataset=dataset,
        prior=prior,
        settings=settings,
        log_norm_const=log_norm_const,
        tau_max=tau_max,
        edges=edges,
        nodes=nodes,
        node_weights=mass / total,
    )


def fit_cached(
    dataset: Dataset,
    prior: HeterogeneityPrior,
    settings: QuadratureSettings | None = None,
) -> TauPosterior:
    settings = settings or load_settings()
    key = cache_key("tau-posterior", dataset.model_dump(), prior.spec(), vars(settings))
    tp = posterior_cache.get(key)
    if tp is None:
        tp = fit_tau_posterior(dataset, prior, settings)
        posterior_cache.set(key, tp)
    return tp


# --- marginal summaries ---


def expected_weights(tp: TauPosterior) -> tuple[np.ndarray, np.ndarray]:
    """Posterior expected IV weights E[w_i] and shrinkage weights E[c_ij]."""
    m = tp.moments
    return m.iv_weights.copy(), m.shrink_c.copy()


def credible_interval(
    cdf: Callable[[float], float],
    mean: float,
    sd: float,
    level: float,
    kind: IntervalKind = "shortest",
) -> tuple[float, float]:
    if not 0 < level < 1:
        raise DomainError(f"credible level must lie in (0, 1), got {level!r}")

    def q(p: float) -> float:
        return bracket_quantile(cdf, p, mean, 4.0 * sd)

    if kind == "central":
        return q(0.5 * (1 - level)), q(0.5 * (1 + level))
    if kind != "shortest":
        raise DomainError(f"unknown interval kind {kind!r}")

    start, stop = q(_EDGE_MASS), q(1.0 - level - _EDGE_MASS)
    if not stop > start:
        return q(0.5 * (1 - level)), q(0.5 * (1 + level))

    def width(lo: float) -> float:
        upper_p = min(cdf(lo) + level, 1.0 - 1e-12)
        return q(upper_p) - lo

    res = optimize.minimize_scalar(
        width,
        bounds=(start, stop),
        method="bounded",
        options={"xatol": 1e-7 * max(sd, 1e-12), "maxiter": 200},
    )
    if not res.success:
        raise ConvergenceError(f"shortest interval search failed: {res.message}", estimate=res.x)
    lo = float(res.x)
    return lo, lo + float(res.fun)


def marginal_theta(
    tp: TauPosterior,
    j: int,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
) -> ThetaSummary:
    """Shrinkage estimate of study j (0-based index)."""
    ds = tp.dataset
    if not 0 <= j < ds.k:
        raise DomainError(f"study index {j + 1} out of range 1..{ds.k}")
    m = tp.moments
    mean = float(m.theta_mean[j])
    sd = math.sqrt(float(m.theta_var[j]))
    lo, hi = credible_interval(tp.theta_cdf(j), mean, sd, level, kind)
    return ThetaSummary(
        index=j + 1,
        label=ds.studies[j].label,
        expected_weights=m.shrink_c[:, j].tolist(),
        mean=mean,
        sd=sd,
        lo=lo,
        hi=hi,
        level=level,
        interval_kind=kind,
        precision_gain=float(ds.sigma[j] / sd),
    )


def marginal_mu(tp: TauPosterior, level: float = 0.95, kind: IntervalKind = "shortest") -> OverallSummary:
    m = tp.moments
    sd = math.sqrt(m.mu_var)
    lo, hi = credible_interval(tp.mu_cdf(), m.mu_mean, sd, level, kind)
    return OverallSummary(
        expected_weights=m.iv_weights.tolist(),
        mean=m.mu_mean,
        sd=sd,
        lo=lo,
        hi=hi,
        level=level,
        interval_kind=kind,
    )


def tau_summary(tp: TauPosterior, level: float = 0.95) -> TauSummary:
    if not 0 < level < 1:
        raise DomainError(f"credible level must lie in (0, 1), got {level!r}")
    return TauSummary(
        mean=tp.moments.tau_mean,
        median=tp.quantile(0.5),
        lo=tp.quantile(0.5 * (1 - level)),
        hi=tp.quantile(0.5 * (1 + level)),
        level=level,
    )


def single_study_summary(
    study: Study,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
    index: int = 1,
) -> ThetaSummary:
    """Plain normal summary of one study analysed on its own."""
    if not 0 < level < 1:
        raise DomainError(f"credible level must lie in (0, 1), got {level!r}")
    half = normal_quantile(0.5 * (1 + level)) * study.sigma
    return ThetaSummary(
        index=index,
        label=study.label,
        expected_weights=[1.0],
        mean=study.y,
        sd=study.sigma,
        lo=study.y - half,
        hi=study.y + half,
        level=level,
        interval_kind=kind,
        precision_gain=1.0,
    )


def analyze(
    dataset: Dataset,
    prior: HeterogeneityPrior,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
    targets: list[int] | None = None,
    settings: QuadratureSettings | None = None,
    with_tau: bool = True,
) -> ShrinkageResult:
    tp = fit_cached(dataset, prior, settings)
    indices = range(dataset.k) if targets is None else targets
    return ShrinkageResult(
        prior=prior.describe(),
        labels=dataset.labels,
        studies=[marginal_theta(tp, j, level, kind) for j in indices],
        overall=marginal_mu(tp, level, kind),
        tau=tau_summary(tp, level) if with_tau else None,
    )
