"""Counter-based seeding shared by the Monte-Carlo routines.

Work is cut into fixed-size blocks and block ``k`` always draws from
``SeedSequence([seed, k])``, so tallies depend only on ``(seed, n)`` and never
on how (or whether) blocks are spread across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 18

T = TypeVar("T")


def block_sizes(n: int, block: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def map_blocks(fn: Callable[[np.random.Generator, int], T], n: int, seed: int, workers: int = 1) -> list[T]:
    """Apply ``fn(rng, size)`` to every block, in block order."""
    sizes = block_sizes(n)
    jobs = [(block_rng(seed, k), size) for k, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) == 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
