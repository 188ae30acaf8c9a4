"""Deterministic fan-out helper for embarrassingly parallel work.

Results are always assembled in submission order, so the output is
bit-identical no matter how many workers run.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items, jobs: int = 1) -> list:
    """Map ``fn`` over ``items`` with an optional process pool.

    ``jobs <= 1`` runs inline.  Per-item work must be a pure function of its
    argument; ordering of the returned list always follows ``items``.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))
