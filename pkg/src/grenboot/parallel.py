"""Deterministic fan-out of independent replicates over worker threads."""

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["default_threads", "map_indexed"]


def default_threads():
    """Worker count from the GRENBOOT_THREADS environment variable, else 1."""
    raw = os.environ.get("GRENBOOT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_indexed(fn, count, threads=1):
    """Evaluate ``fn(i)`` for i in range(count), results in index order.

    Each unit of work must derive all of its randomness from its own index
    (via a substream keyed by i), so the result list is identical for every
    thread count and schedule.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, range(count)))
