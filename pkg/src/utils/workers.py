import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_VARIABLE = "FRACDIFF_THREADS"


def worker_count():
    """Number of data-parallel workers, capped by FRACDIFF_THREADS"""
    available = os.cpu_count() or 1
    raw = os.environ.get(THREADS_VARIABLE)
    if not raw:
        return available
    try:
        requested = int(raw)
    except ValueError:
        return available
    return max(1, min(requested, available))


def map_chunks(fn, count, workers=None):
    """Apply fn(index_slice) over `count` items split into contiguous chunks.

    Results come back in chunk order.
    """
    workers = workers or worker_count()
    if count == 0:
        return []
    pieces = min(workers, count)
    bounds = np.linspace(0, count, pieces + 1).astype(int)
    slices = [slice(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    if len(slices) == 1:
        return [fn(slices[0])]
    with ThreadPoolExecutor(max_workers=len(slices)) as executor:
        return list(executor.map(fn, slices))
