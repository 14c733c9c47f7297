"""Deterministic fan-out of independent realizations.

Work items are realization indices; each item's randomness is fully
determined by (master_seed, index), so results are identical for any
worker count.  Per-item work is forced single-threaded (BLAS included)
and collected in index order, making the reduction a pure function of
the inputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits

_WORKER_LIMITS = None


def _init_worker():
    global _WORKER_LIMITS
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    _WORKER_LIMITS = threadpool_limits(limits=1)


def map_realizations(fn, n: int, workers: int = 1, chunksize: int | None = None) -> list:
    """[fn(0), ..., fn(n-1)], computed with the given worker count.

    fn must be picklable (module-level function or functools.partial of
    one) when workers > 1.
    """
    if n < 0:
        raise ValueError("realization count must be >= 0")
    if workers <= 1 or n <= 1:
        with threadpool_limits(limits=1):
            return [fn(i) for i in range(n)]
    if chunksize is None:
        chunksize = max(1, n // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as ex:
        return list(ex.map(fn, range(n), chunksize=chunksize))
