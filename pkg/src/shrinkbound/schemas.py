from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

IntervalKind = Literal["central", "shortest"]
OutputFormat = Literal["text", "json", "csv"]


class Study(BaseModel):
    model_config = {"frozen": True}

    label: str = Field(..., min_length=1)
    y: float = Field(..., description="Effect estimate on a normal-approximation scale")
    sigma: float = Field(..., gt=0, description="Standard error of y")

    @field_validator("y", "sigma")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v


def label_index(labels: list[str], target: str) -> int:
    """Resolve a label or a 1-based index string to a 0-based index."""
    if target in labels:
        return labels.index(target)
    if target.isdigit() and 1 <= int(target) <= len(labels):
        return int(target) - 1
    raise KeyError(target)


class Dataset(BaseModel):
    """Ordered study summaries; reports use 1-based indices."""

    model_config = {"frozen": True}

    studies: list[Study]

    @model_validator(mode="after")
    def _check_studies(self) -> Dataset:
        if len(self.studies) < 2:
            raise ValueError(f"a dataset needs at least 2 studies, got {len(self.studies)}")
        labels = [s.label for s in self.studies]
        dupes = sorted({lab for lab in labels if labels.count(lab) > 1})
        if dupes:
            raise ValueError(f"duplicate study labels: {', '.join(dupes)}")
        return self

    @classmethod
    def from_arrays(
        cls,
        y: list[float] | np.ndarray,
        sigma: list[float] | np.ndarray,
        labels: list[str] | None = None,
    ) -> Dataset:
        if len(y) != len(sigma):
            raise ValueError("y and sigma must have the same length")
        if labels is None:
            labels = [str(i + 1) for i in range(len(y))]
        return cls(
            studies=[
                Study(label=lab, y=float(yi), sigma=float(si))
                for lab, yi, si in zip(labels, y, sigma)
            ]
        )

    @property
    def k(self) -> int:
        return len(self.studies)

    @property
    def y(self) -> np.ndarray:
        return np.array([s.y for s in self.studies], dtype=float)

    @property
    def sigma(self) -> np.ndarray:
        return np.array([s.sigma for s in self.studies], dtype=float)

    @property
    def sigma2(self) -> np.ndarray:
        return self.sigma**2

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.studies]

    def index_of(self, target: str) -> int:
        return label_index(self.labels, target)

    def with_y(self, y: list[float] | np.ndarray) -> Dataset:
        return Dataset.from_arrays(y, self.sigma, self.labels)


# --- Results ---


class ThetaSummary(BaseModel):
    """Marginal posterior summary of one study-specific effect."""

    index: int = Field(..., ge=1)
    label: str
    expected_weights: list[float]
    mean: float
    sd: float
    lo: float
    hi: float
    level: float
    interval_kind: IntervalKind
    precision_gain: float


class OverallSummary(BaseModel):
    expected_weights: list[float]
    mean: float
    sd: float
    lo: float
    hi: float
    level: float
    interval_kind: IntervalKind


class TauSummary(BaseModel):
    mean: float
    median: float
    lo: float
    hi: float
    level: float


class ShrinkageResult(BaseModel):
    prior: str
    labels: list[str]
    studies: list[ThetaSummary]
    overall: OverallSummary | None = None
    tau: TauSummary | None = None


class BoundsRow(BaseModel):
    index: int = Field(..., ge=1)
    label: str
    sigma: float
    fe_weight: float
    coincidence_weight: float
    actual_weight: float | None = None


class BoundsReport(BaseModel):
    prior: str
    sigmas: list[float]
    rows: list[BoundsRow]


class SweepRow(BaseModel):
    x: float
    weight: float
    mean: float
    lo: float
    hi: float


class SweepTable(BaseModel):
    abscissa: Literal["delta", "scale"]
    target: int = Field(..., ge=1)
    prior: str
    rows: list[SweepRow]

    @model_validator(mode="after")
    def _ordered(self) -> SweepTable:
        xs = [r.x for r in self.rows]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ValueError("sweep rows must be ordered by abscissa")
        return self


class OrderingVerdict(BaseModel):
    ordered: bool
    max_cdf_violation: float
    mlr_monotone: bool
    max_log_ratio_decrease: float
    grid_size: int


class AnalysisConfig(BaseModel):
    data: str | None = None
    sigmas: list[float] | None = None
    prior: str = "half-normal:0.5"
    level: float = Field(0.95, gt=0, lt=1)
    interval: IntervalKind = "shortest"
    target: str | None = None
    format: OutputFormat = "text"
    oracle: bool = False
    out: str | None = None


# --- Oracle ---


class OracleEstimate(BaseModel):
    value: float
    mc_std_error: float = Field(0.0, ge=0)
    method: Literal["grid", "monte-carlo"]
    size: int = Field(..., ge=1, description="grid_size or sample_count")
    seed: int | None = None


class MonteCarloTheta(BaseModel):
    """Sampling summary of one study effect, each figure with its MC error."""

    index: int = Field(..., ge=1)
    mean: OracleEstimate
    sd: OracleEstimate
    lo: OracleEstimate
    hi: OracleEstimate
    level: float
    effective_sample_size: float


class OracleCheck(BaseModel):
    """Brute-force cross-check of one target's self-weight and effect."""

    index: int = Field(..., ge=1)
    quadrature_weight: float
    grid_weight: OracleEstimate
    monte_carlo: MonteCarloTheta


class AnalysisReport(BaseModel):
    result: ShrinkageResult
    bounds: BoundsReport | None = None
    oracle: list[OracleCheck] | None = None
