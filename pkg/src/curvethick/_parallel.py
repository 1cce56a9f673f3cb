"""Deterministic block-parallel helpers.

Work is split into index-ordered blocks; results are gathered in block order
before any reduction, so the outcome is bit-identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

_DEFAULT = 1


def resolve_threads(threads=None):
    """Explicit argument wins, then THICKNESS_THREADS, then 1."""
    if threads is not None and threads >= 1:
        return int(threads)
    env = os.environ.get("THICKNESS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return _DEFAULT


def map_blocks(fn, blocks, threads=1):
    """Apply fn to each block, returning results in block order."""
    threads = resolve_threads(threads)
    blocks = list(blocks)
    if threads <= 1 or len(blocks) <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, blocks))
