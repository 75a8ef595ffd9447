"""Deterministic parallel map over independent work items.

Results are collected by item index and reduced in that fixed order, so
output bytes do not depend on the worker count or completion order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, as_completed


def map_indexed(fn, items: list[tuple], workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(*args) for args in items]
    results = [None] * len(items)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, *args): i for i, args in enumerate(items)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results
