"""Deterministic fork-based worker pool helpers.

Workers inherit read-only state through module globals set before the
pool forks; results are always collected in input order, so the worker
count never changes output bytes.
"""

from __future__ import annotations

import multiprocessing


def chunked(items: list, workers: int) -> list[list]:
    """Split items into at most 4*workers contiguous chunks, in order."""
    if not items:
        return []
    n_chunks = min(len(items), max(1, workers * 4))
    size = (len(items) + n_chunks - 1) // n_chunks
    return [items[i : i + size] for i in range(0, len(items), size)]


def fork_map(fn, items: list, workers: int) -> list:
    """Map fn over items, preserving order; serial fallback when needed."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:
        return [fn(x) for x in items]
    with ctx.Pool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items)
