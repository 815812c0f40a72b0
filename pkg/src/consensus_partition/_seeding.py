"""Seed derivation and deterministic parallel map.

Every random stream is a PCG64 generator whose seed is derived from the
command's master seed and a list of labels by SHA-256, so the stream of,
say, ensemble member 17 does not depend on how many other members were
drawn before it or on which thread draws it.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def derive_seed(master: int, *labels) -> int:
    text = ":".join([str(int(master))] + [str(x) for x in labels])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def make_rng(master: int, *labels) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master, *labels)))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``list(map(fn, items))``, on a thread pool when ``THREADS`` > 1.

    Results always come back in input order.
    """
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
