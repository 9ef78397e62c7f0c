from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import stats

from .errors import DomainError

PriorKind = Literal["half-normal", "half-cauchy", "uniform", "tabulated"]

# Families whose single parameter is a scale: larger scale = stochastically larger.
SCALE_FAMILIES: tuple[PriorKind, ...] = ("half-normal", "half-cauchy", "uniform")


@dataclass(frozen=True, eq=False)
class HeterogeneityPrior:
    """Prior on the between-study standard deviation tau.

    Parametric kinds wrap a frozen ``scipy.stats`` distribution; the
    tabulated kind holds a density grid renormalized by the trapezoid rule
    with a piecewise-linear CDF.
    """

    kind: PriorKind
    parameter: float | None = None
    grid: tuple[float, ...] = ()
    values: tuple[float, ...] = ()
    _dist: object = field(default=None, repr=False, compare=False)
    _cdf_table: tuple[float, ...] = field(default=(), repr=False, compare=False)

    # --- constructors ---

    @classmethod
    def half_normal(cls, scale: float) -> HeterogeneityPrior:
        _check_positive("half-normal scale", scale)
        return cls("half-normal", float(scale), _dist=stats.halfnorm(scale=scale))

    @classmethod
    def half_cauchy(cls, scale: float) -> HeterogeneityPrior:
        _check_positive("half-cauchy scale", scale)
        return cls("half-cauchy", float(scale), _dist=stats.halfcauchy(scale=scale))

    @classmethod
    def uniform(cls, upper: float) -> HeterogeneityPrior:
        _check_positive("uniform upper bound", upper)
        return cls("uniform", float(upper), _dist=stats.uniform(loc=0.0, scale=upper))

    @classmethod
    def tabulated(cls, grid, values) -> HeterogeneityPrior:
        tau = np.asarray(grid, dtype=float)
        dens = np.asarray(values, dtype=float)
        if tau.ndim != 1 or tau.shape != dens.shape or tau.size < 2:
            raise DomainError("tabulated prior needs matching 1-d grids with at least 2 points")
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(dens))):
            raise DomainError("tabulated prior grid and density must be finite")
        if tau[0] < 0 or np.any(np.diff(tau) <= 0):
            raise DomainError("tabulated prior grid must be nonnegative and strictly increasing")
        if np.any(dens < 0):
            raise DomainError("tabulated prior density must be nonnegative")
        total = float(np.trapezoid(dens, tau))
        if total <= 0:
            raise DomainError("tabulated prior density integrates to zero")
        dens = dens / total
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(tau))))
        cdf = np.minimum(cdf / cdf[-1], 1.0)
        return cls(
            "tabulated",
            None,
            grid=tuple(tau.tolist()),
            values=tuple(dens.tolist()),
            _cdf_table=tuple(cdf.tolist()),
        )

    @classmethod
    def of_family(cls, kind: str, parameter: float) -> HeterogeneityPrior:
        makers = {
            "half-normal": cls.half_normal,
            "half-cauchy": cls.half_cauchy,
            "uniform": cls.uniform,
        }
        if kind not in makers:
            raise DomainError(f"{kind!r} is not a scale family")
        return makers[kind](parameter)

    # --- distribution functions ---

    def pdf(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "tabulated":
            out = np.interp(tau, self.grid, self.values, left=0.0, right=0.0)
        else:
            out = self._dist.pdf(tau)
        return np.where(tau < 0, 0.0, out)

    def logpdf(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "tabulated":
            with np.errstate(divide="ignore"):
                return np.log(self.pdf(tau))
        out = self._dist.logpdf(tau)
        return np.where(tau < 0, -np.inf, out)

    def cdf(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.kind == "tabulated":
            return np.interp(tau, self.grid, self._cdf_table, left=0.0, right=1.0)
        return np.clip(self._dist.cdf(np.maximum(tau, 0.0)), 0.0, 1.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise DomainError("quantile probability must lie in [0, 1]")
        if self.kind == "tabulated":
            # drop flat stretches so the inverse interpolation is single-valued
            cdf = np.asarray(self._cdf_table)
            keep = np.concatenate(([True], np.diff(cdf) > 0))
            return np.interp(p, cdf[keep], np.asarray(self.grid)[keep])
        return self._dist.ppf(p)

    @property
    def support_max(self) -> float:
        if self.kind == "uniform":
            return float(self.parameter)
        if self.kind == "tabulated":
            return float(self.grid[-1])
        return math.inf

    # --- comparisons ---

    def stochastically_precedes(self, other: HeterogeneityPrior) -> bool | None:
        """True if ``other`` is stochastically at least as large as ``self``.

        Only decidable within one scale family; returns None otherwise.
        """
        if self.kind != other.kind or self.kind not in SCALE_FAMILIES:
            return None
        return self.parameter <= other.parameter

    def describe(self) -> str:
        short = {"half-normal": "HN", "half-cauchy": "HC", "uniform": "U"}
        if self.kind == "tabulated":
            return f"tabulated({len(self.grid)} points, max {self.grid[-1]:g})"
        return f"{short[self.kind]}({self.parameter:g})"

    def spec(self) -> dict:
        """Canonical, JSON-serializable description (used for cache keys)."""
        if self.kind == "tabulated":
            return {"kind": self.kind, "grid": list(self.grid), "values": list(self.values)}
        return {"kind": self.kind, "parameter": self.parameter}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeterogeneityPrior):
            return NotImplemented
        return self.spec() == other.spec()

    def __hash__(self) -> int:
        return hash((self.kind, self.parameter, self.grid, self.values))


def _check_positive(name: str, value: float) -> None:
    try:
        ok = math.isfinite(float(value)) and float(value) > 0
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


def prior_from_spec(spec: dict) -> HeterogeneityPrior:
    """Rebuild a prior from ``HeterogeneityPrior.spec()`` output."""
    if spec["kind"] == "tabulated":
        return HeterogeneityPrior.tabulated(spec["grid"], spec["values"])
    return HeterogeneityPrior.of_family(spec["kind"], spec["parameter"])
