"""Deterministic seed splitting and the process-wide parallelism cap.

Child seeds come from the SplitMix64 output function applied to a
Weyl-sequence counter::

    z = (seed + (k + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    child = z ^ (z >> 31)

so ``child_seed(seed, k)`` is the ``k``-th output of a SplitMix64 stream
started at ``seed``. It depends only on ``(seed, k)``, never on how many
siblings were drawn or in which order.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def child_seed(seed, k):
    """64-bit child seed for stream index ``k`` of parent ``seed``."""
    if k < 0:
        raise ValueError("stream index must be non-negative")
    return splitmix64((int(seed) & MASK64) + (k + 1) * GOLDEN_GAMMA)


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def thread_count(threads=None):
    """Resolve a worker count, honouring ``PAREIDOLIA_THREADS`` as a cap."""
    cap = os.environ.get("PAREIDOLIA_THREADS")
    n = threads if threads is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, int(n))


def parallel_map(fn, items, threads=None):
    """Order-preserving map; results never depend on the worker count."""
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
