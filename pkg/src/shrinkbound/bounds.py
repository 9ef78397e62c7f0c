"""A-priori bounds on shrinkage weights and sweeps over data and prior scale."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict

import numpy as np

from .config import QuadratureSettings, load_config, load_settings
from .errors import DomainError, NumericalError, UnsupportedError
from .posterior import TauPosterior, fit_cached, marginal_theta
from .priors import HeterogeneityPrior
from .schemas import BoundsReport, BoundsRow, Dataset, IntervalKind, OrderingVerdict, SweepRow, SweepTable
from .worker import SweepPool

logger = logging.getLogger(__name__)

ORDERING_TOL = 1e-9
ORDERING_GRID_SIZE = 512
# Largest tolerated difference between coincidence runs at y = 0 and y = 1.
COINCIDENCE_INVARIANCE_TOL = 1e-10


def _sigmas(sigmas) -> np.ndarray:
    s = np.asarray(sigmas, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DomainError("need a non-empty vector of standard errors")
    if np.any(~np.isfinite(s)) or np.any(s <= 0):
        raise DomainError("standard errors must be positive and finite")
    return s


def _pooled_sigmas(sigmas) -> np.ndarray:
    s = _sigmas(sigmas)
    if s.size < 2:
        raise DomainError(f"pooling needs at least 2 studies, got {s.size}")
    return s


def fe_weights(sigmas) -> np.ndarray:
    """Fixed-effect (tau = 0) weights; the absolute lower bound on self-weights."""
    prec = _sigmas(sigmas) ** -2.0
    return prec / prec.sum()


def coincidence_weights(
    sigmas,
    prior: HeterogeneityPrior,
    settings: QuadratureSettings | None = None,
) -> np.ndarray:
    """Posterior mean self-weights E[c_jj] when all estimates coincide."""
    s = _pooled_sigmas(sigmas)
    at_zero = np.diag(fit_cached(Dataset.from_arrays(np.zeros_like(s), s), prior, settings).moments.shrink_c)
    at_one = np.diag(fit_cached(Dataset.from_arrays(np.ones_like(s), s), prior, settings).moments.shrink_c)
    drift = float(np.max(np.abs(at_zero - at_one)))
    if drift > COINCIDENCE_INVARIANCE_TOL:
        raise NumericalError(f"coincidence weights depend on the common value (drift {drift:.3g})")
    return at_zero.copy()


def actual_weights(
    dataset: Dataset,
    prior: HeterogeneityPrior,
    settings: QuadratureSettings | None = None,
) -> np.ndarray:
    return np.diag(fit_cached(dataset, prior, settings).moments.shrink_c).copy()


def bounds_report(
    prior: HeterogeneityPrior,
    sigmas=None,
    dataset: Dataset | None = None,
    settings: QuadratureSettings | None = None,
) -> BoundsReport:
    """FE, coincidence and (with data) actual self-weights per study."""
    if dataset is not None:
        s = dataset.sigma
        labels = dataset.labels
    elif sigmas is not None:
        s = _sigmas(sigmas)
        labels = [str(i + 1) for i in range(s.size)]
    else:
        raise DomainError("bounds need standard errors or a dataset")
    fe = fe_weights(s)
    coin = coincidence_weights(s, prior, settings)
    actual = actual_weights(dataset, prior, settings) if dataset is not None else None
    rows = []
    for j in range(s.size):
        row = BoundsRow(
            index=j + 1,
            label=labels[j],
            sigma=float(s[j]),
            fe_weight=float(fe[j]),
            coincidence_weight=float(coin[j]),
            actual_weight=None if actual is None else float(actual[j]),
        )
        if row.coincidence_weight < row.fe_weight - 1e-9 or (
            row.actual_weight is not None and row.actual_weight < row.coincidence_weight - 1e-9
        ):
            logger.warning("weight bounds out of order for study %s: %s", row.label, row)
        rows.append(row)
    return BoundsReport(prior=prior.describe(), sigmas=s.tolist(), rows=rows)


# --- sweeps ---


def sweep_row(
    sigmas,
    y,
    prior: HeterogeneityPrior,
    j: int,
    x: float,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
    settings: QuadratureSettings | None = None,
) -> SweepRow:
    s = _pooled_sigmas(sigmas)
    tp = fit_cached(Dataset.from_arrays(y, s), prior, settings)
    summary = marginal_theta(tp, j, level, kind)
    return SweepRow(
        x=x,
        weight=summary.expected_weights[j],
        mean=summary.mean,
        lo=summary.lo,
        hi=summary.hi,
    )


def _check_grid(values, name: str) -> list[float]:
    grid = [float(v) for v in values]
    if not grid:
        raise DomainError(f"{name} grid is empty")
    if any(not math.isfinite(v) for v in grid):
        raise DomainError(f"{name} grid must be finite")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError(f"{name} grid must be ascending")
    return grid


def _run_rows(params: list[dict], workers: int | None) -> list[SweepRow]:
    workers = load_config().sweep_workers if workers is None else workers
    logger.info("sweep: %d rows on %d worker(s)", len(params), workers)
    with SweepPool(workers) as pool:
        return [SweepRow(**row) for row in pool.run_sweep_rows(params)]


def discrepancy_sweep(
    sigmas,
    prior: HeterogeneityPrior,
    j: int,
    deltas,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
    settings: QuadratureSettings | None = None,
    workers: int | None = None,
) -> SweepTable:
    """Self-weight and shrinkage estimate of study j for y = (0, delta)."""
    s = _sigmas(sigmas)
    if s.size != 2:
        raise UnsupportedError(f"discrepancy sweeps need k = 2 studies, got k = {s.size}")
    if not 0 <= j < 2:
        raise DomainError(f"study index {j + 1} out of range 1..2")
    settings = settings or load_settings()
    params = [
        {
            "sigmas": s.tolist(),
            "y": [0.0, d],
            "prior": prior.spec(),
            "j": j,
            "x": d,
            "level": level,
            "kind": kind,
            "settings": asdict(settings),
        }
        for d in _check_grid(deltas, "delta")
    ]
    return SweepTable(abscissa="delta", target=j + 1, prior=prior.describe(), rows=_run_rows(params, workers))


def prior_scale_sweep(
    sigmas,
    scales,
    j: int,
    family: str = "half-normal",
    y=None,
    level: float = 0.95,
    kind: IntervalKind = "shortest",
    settings: QuadratureSettings | None = None,
    workers: int | None = None,
) -> SweepTable:
    """Self-weight of study j across a scale family; y = None means coincidence mode."""
    s = _pooled_sigmas(sigmas)
    if not 0 <= j < s.size:
        raise DomainError(f"study index {j + 1} out of range 1..{s.size}")
    if family not in ("half-normal", "half-cauchy"):
        raise DomainError(f"scale sweeps support half-normal and half-cauchy, got {family!r}")
    grid = _check_grid(scales, "scale")
    if any(v <= 0 for v in grid):
        raise DomainError("prior scales must be positive")
    y_vals = np.zeros_like(s) if y is None else np.asarray(y, dtype=float)
    if y_vals.shape != s.shape:
        raise DomainError("y and sigmas must have the same length")
    settings = settings or load_settings()
    params = [
        {
            "sigmas": s.tolist(),
            "y": y_vals.tolist(),
            "prior": HeterogeneityPrior.of_family(family, scale).spec(),
            "j": j,
            "x": scale,
            "level": level,
            "kind": kind,
            "settings": asdict(settings),
        }
        for scale in grid
    ]
    label = f"{family} scales"
    return SweepTable(abscissa="scale", target=j + 1, prior=label, rows=_run_rows(params, workers))


# --- stochastic ordering ---


def verify_stochastic_ordering(
    analysis_a: TauPosterior,
    analysis_b: TauPosterior,
    tau_grid=None,
    tol: float = ORDERING_TOL,
) -> OrderingVerdict:
    """Check that the tau posterior of ``analysis_b`` is stochastically larger.

    Compares CDFs pointwise (F_b <= F_a) and checks that the log ratio of
    unnormalized posteriors is nondecreasing on the grid.
    """
    if not np.array_equal(analysis_a.dataset.sigma, analysis_b.dataset.sigma):
        raise DomainError("stochastic ordering checks need the same standard errors")
    if tau_grid is None:
        upper = max(analysis_a.tau_max, analysis_b.tau_max)
        grid = np.linspace(0.0, upper, ORDERING_GRID_SIZE)
    else:
        grid = np.asarray(tau_grid, dtype=float)
    cdf_a = analysis_a.cdf(grid)
    cdf_b = analysis_b.cdf(grid)
    violation = max(0.0, float(np.max(cdf_b - cdf_a)))

    with np.errstate(invalid="ignore"):
        log_ratio = analysis_b.log_unnorm(grid) - analysis_a.log_unnorm(grid)
    finite = log_ratio[np.isfinite(log_ratio)]
    decrease = max(0.0, float(-np.min(np.diff(finite)))) if finite.size > 1 else 0.0
    return OrderingVerdict(
        ordered=violation <= tol,
        max_cdf_violation=violation,
        mlr_monotone=decrease <= tol,
        max_log_ratio_decrease=decrease,
        grid_size=int(grid.size),
    )


# --- design-stage standard errors ---


def se_from_sample_size(n: int, uisd: float = 4.0) -> float:
    """Standard error uisd / sqrt(n) from a unit-information standard deviation."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"sample size must be an integer >= 1, got {n!r}")
    if not (math.isfinite(uisd) and uisd > 0):
        raise DomainError(f"unit-information SD must be positive, got {uisd!r}")
    return uisd / math.sqrt(n)


def se_from_balanced_binary(n: int) -> float:
    """Log-odds-ratio SE of a balanced two-arm binary trial of total size n."""
    return se_from_sample_size(n, 4.0)
