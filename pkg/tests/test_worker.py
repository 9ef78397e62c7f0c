from __future__ import annotations

from dataclasses import asdict

import pytest

from shrinkbound.bounds import discrepancy_sweep
from shrinkbound.config import QuadratureSettings
from shrinkbound.priors import HeterogeneityPrior
from shrinkbound.worker import SweepPool


def params(delta: float) -> dict:
    return {
        "sigmas": [0.8, 0.2],
        "y": [0.0, delta],
        "prior": HeterogeneityPrior.half_normal(0.5).spec(),
        "j": 0,
        "x": delta,
        "level": 0.95,
        "kind": "central",
        "settings": asdict(QuadratureSettings()),
    }


def test_inline_pool_keeps_order():
    with SweepPool(1) as pool:
        rows = pool.run_sweep_rows([params(1.0), params(0.0)])
    assert [r["x"] for r in rows] == [1.0, 0.0]
    assert rows[1]["weight"] < rows[0]["weight"]


@pytest.mark.slow
def test_process_pool_matches_inline():
    deltas = [-1.0, 0.0, 0.5, 2.0]
    prior = HeterogeneityPrior.half_normal(0.5)
    inline = discrepancy_sweep([0.8, 0.2], prior, 0, deltas, workers=1)
    pooled = discrepancy_sweep([0.8, 0.2], prior, 0, deltas, workers=2)
    assert [r.model_dump() for r in pooled.rows] == [r.model_dump() for r in inline.rows]


def test_shutdown_is_idempotent():
    pool = SweepPool(2)
    pool.start()
    pool.shutdown()
    pool.shutdown()
