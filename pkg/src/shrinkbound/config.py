from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .errors import DomainError


def _env_int(key: str, default: int) -> int:
    val = os.environ.get(key)
    if val is None or val.strip() == "":
        return default
    return int(val)


def _env_float(key: str, default: float) -> float:
    val = os.environ.get(key)
    if val is None or val.strip() == "":
        return default
    return float(val)


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances shared by every marginalization over tau."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    tail_mass_cutoff: float = 1e-7

    def __post_init__(self) -> None:
        for name in ("rel_tol", "abs_tol", "tail_mass_cutoff"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be positive and finite, got {val!r}")
        if self.rel_tol >= 1:
            raise DomainError(f"rel_tol must be < 1, got {self.rel_tol!r}")
        if self.tail_mass_cutoff >= 1:
            raise DomainError(f"tail_mass_cutoff must be < 1, got {self.tail_mass_cutoff!r}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions must be a positive integer, got {self.max_subdivisions!r}"
            )


@dataclass(frozen=True)
class RuntimeConfig:
    sweep_workers: int
    cache_entries: int


def load_settings() -> QuadratureSettings:
    defaults = QuadratureSettings()
    return QuadratureSettings(
        rel_tol=_env_float("SHRINKBOUND_QUAD_TOL", defaults.rel_tol),
        abs_tol=defaults.abs_tol,
        max_subdivisions=defaults.max_subdivisions,
        tail_mass_cutoff=defaults.tail_mass_cutoff,
    )


def load_config() -> RuntimeConfig:
    return RuntimeConfig(
        sweep_workers=max(1, _env_int("SHRINKBOUND_SWEEP_WORKERS", 1)),
        cache_entries=max(1, _env_int("SHRINKBOUND_CACHE_ENTRIES", 64)),
    )
