from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate
from scipy import optimize, special

from .config import QuadratureSettings
from .errors import BracketError, ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# Gauss-Legendre order used when a fitted partition is turned into a fixed rule.
NODES_PER_INTERVAL = 21


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error_estimate: float
    intervals: np.ndarray
    evaluations: int


def integrate(
    f: Callable[[float], float | np.ndarray],
    a: float,
    b: float,
    settings: QuadratureSettings | None = None,
    points: Sequence[float] | np.ndarray | None = None,
) -> tuple[float | np.ndarray, float]:
    """Adaptive Gauss-Kronrod integral of a scalar- or vector-valued f over [a, b].

    Returns ``(value, error_estimate)``. Raises ConvergenceError (carrying the
    best estimate) when the subdivision cap is hit before the tolerance.
    """
    res = integrate_full(f, a, b, settings, points)
    return res.value, res.error_estimate


def integrate_full(
    f: Callable[[float], float | np.ndarray],
    a: float,
    b: float,
    settings: QuadratureSettings | None = None,
    points: Sequence[float] | np.ndarray | None = None,
) -> QuadratureResult:
    settings = settings or QuadratureSettings()
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise DomainError(f"integration limits must be finite with a < b, got [{a}, {b}]")
    pts = np.asarray(points if points is not None else (), dtype=float).ravel()
    inner = sorted({float(p) for p in pts if a < p < b})
    value, err, info = _integrate.quad_vec(
        f,
        a,
        b,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        norm="max",
        limit=settings.max_subdivisions + len(inner),
        points=inner or None,
        full_output=True,
    )
    if not info.success:
        raise ConvergenceError(
            f"quadrature on [{a:g}, {b:g}] did not converge: {info.message}",
            estimate=value,
            error_estimate=float(err),
        )
    return QuadratureResult(
        value=value,
        error_estimate=float(err),
        intervals=np.asarray(info.intervals, dtype=float),
        evaluations=int(info.neval),
    )


def node_rule(intervals: np.ndarray, order: int = NODES_PER_INTERVAL) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over a partition."""
    x, w = np.polynomial.legendre.leggauss(order)
    parts = np.asarray(intervals, dtype=float)
    parts = parts[np.argsort(parts[:, 0])]
    lo, hi = parts[:, :1], parts[:, 1:]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (x + 1.0)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def normal_cdf(x):
    return special.ndtr(x)


def normal_quantile(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0) & (p_arr < 1))):
        raise DomainError(f"normal quantile needs p in (0, 1), got {p!r}")
    out = special.ndtri(p_arr)
    return float(out) if out.ndim == 0 else out


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Bracketed root of f on [lo, hi] (Brent's method, bisection-safe)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)) or flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo:g}, {hi:g}]: f = ({flo:g}, {fhi:g})")
    return float(optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def bracket_quantile(
    cdf: Callable[[float], float],
    p: float,
    center: float,
    scale: float,
    tol: float = 1e-10,
) -> float:
    """Invert a monotone CDF, widening [center - s, center + s] until it brackets p."""
    if not 0 < p < 1:
        raise DomainError(f"quantile probability must lie in (0, 1), got {p!r}")
    scale = max(scale, 1e-12)
    lo, hi = center - scale, center + scale
    for _ in range(60):
        if cdf(lo) <= p <= cdf(hi):
            return find_root(lambda x: cdf(x) - p, lo, hi, tol * max(1.0, scale))
        lo, hi = center - 2 * (center - lo), center + 2 * (hi - center)
    raise BracketError(f"could not bracket the {p:g} quantile around {center:g}")
