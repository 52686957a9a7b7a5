"""Order-preserving map over contiguous shards of stream ids.

Each shard is a pure function of its ids, and outputs are concatenated in
id order before any reduction, so results do not depend on worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

ENV_THREADS = "SCHRO_RENORM_THREADS"


def worker_count() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get(ENV_THREADS)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def shards(ids: np.ndarray, size: int) -> list[np.ndarray]:
    return [ids[i:i + size] for i in range(0, ids.size, size)]


def map_shards(fn, ids, shard_size: int, *args, workers: int | None = None):
    """Apply ``fn(shard_ids, *args)`` to every shard; returns the list of results in order."""
    ids = np.asarray(ids, dtype=np.int64)
    parts = shards(ids, max(1, shard_size))
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(parts) <= 1:
        return [fn(p, *args) for p in parts]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, parts, *[[a] * len(parts) for a in args]))
