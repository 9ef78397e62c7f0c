from __future__ import annotations

import pytest

from shrinkbound.config import QuadratureSettings, load_config, load_settings
from shrinkbound.errors import DomainError


def test_defaults():
    s = QuadratureSettings()
    assert s.rel_tol == 1e-8
    assert s.abs_tol == 1e-12
    assert s.max_subdivisions == 200
    assert s.tail_mass_cutoff == 1e-7


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rel_tol": 0.0},
        {"rel_tol": 1.0},
        {"abs_tol": -1e-12},
        {"max_subdivisions": 0},
        {"max_subdivisions": 2.5},
        {"tail_mass_cutoff": 1.0},
    ],
)
def test_rejects_invalid(kwargs):
    with pytest.raises(DomainError):
        QuadratureSettings(**kwargs)


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("SHRINKBOUND_QUAD_TOL", "1e-6")
    assert load_settings().rel_tol == 1e-6
    monkeypatch.setenv("SHRINKBOUND_QUAD_TOL", "")
    assert load_settings().rel_tol == 1e-8


def test_runtime_config(monkeypatch):
    monkeypatch.setenv("SHRINKBOUND_SWEEP_WORKERS", "3")
    monkeypatch.setenv("SHRINKBOUND_CACHE_ENTRIES", "0")
    cfg = load_config()
    assert cfg.sweep_workers == 3
    assert cfg.cache_entries == 1
