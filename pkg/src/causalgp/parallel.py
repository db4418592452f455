"""Deterministic process fan-out for the replication harnesses.

Workers are separate processes (spawn start method) so numerical results
cannot depend on thread interleaving inside a shared BLAS; each worker
pins its BLAS pools to one thread to avoid oversubscription.  Task order
is preserved in the returned list, so reductions over it do not depend
on scheduling and the worker count never changes a result.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor

# keep the limiter alive for the worker's lifetime, otherwise the limits
# could be restored when the object is collected
_worker_limiter = None


def _pin_worker_blas():
    global _worker_limiter
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - optional dependency
        return
    _worker_limiter = threadpool_limits(limits=1)


def parallel_map(fn, payloads, workers: int = 1) -> list:
    """Apply `fn` to every payload, in order, optionally across processes.

    `fn` must be a module-level function and each payload picklable.
    """
    payloads = list(payloads)
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(
        max_workers=int(workers), mp_context=ctx, initializer=_pin_worker_blas
    ) as pool:
        return list(pool.map(fn, payloads))
