from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor

logger = logging.getLogger(__name__)


# --- Functions that run in worker processes (top-level for pickling) ---


def _sweep_row_in_worker(params: dict) -> dict:
    """Run one sweep analysis in a worker process. Returns a SweepRow dump."""
    from .bounds import sweep_row
    from .config import QuadratureSettings
    from .priors import prior_from_spec

    row = sweep_row(
        sigmas=params["sigmas"],
        y=params["y"],
        prior=prior_from_spec(params["prior"]),
        j=params["j"],
        x=params["x"],
        level=params["level"],
        kind=params["kind"],
        settings=QuadratureSettings(**params["settings"]),
    )
    return row.model_dump()


class SweepPool:
    """Runs independent sweep rows, in-process or on a process pool.

    Results come back in submission order either way.
    """

    def __init__(self, workers: int = 1):
        self._workers = max(1, int(workers))
        self._executor: ProcessPoolExecutor | None = None

    def start(self) -> None:
        if self._workers > 1 and self._executor is None:
            self._executor = ProcessPoolExecutor(max_workers=self._workers)
            logger.info("Sweep pool started with %d workers", self._workers)

    def shutdown(self) -> None:
        if self._executor:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None
            logger.info("Sweep pool shut down")

    def __enter__(self) -> SweepPool:
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()

    def map(self, fn: Callable[[dict], dict], params: Iterable[dict]) -> list[dict]:
        params = list(params)
        if self._executor is None:
            return [fn(p) for p in params]
        futures = [self._executor.submit(fn, p) for p in params]
        return [f.result() for f in futures]

    def run_sweep_rows(self, params: Iterable[dict]) -> list[dict]:
        return self.map(_sweep_row_in_worker, params)
