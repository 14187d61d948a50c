from __future__ import annotations

import os
import typing
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_ROWS = 4096


def default_threads() -> int:
    return os.cpu_count() or 1


def map_row_blocks(
    fn: typing.Callable[[np.ndarray], np.ndarray], X: np.ndarray, threads: int = 1
) -> np.ndarray:
    """Apply a row-wise function over fixed-size contiguous blocks of X.

    Block boundaries never depend on `threads` and blocks are re-assembled in
    order, so the output is bit-identical for any thread count.
    """
    n = X.shape[0]
    if n <= BLOCK_ROWS:
        return fn(X)

    blocks = [X[lo : lo + BLOCK_ROWS] for lo in range(0, n, BLOCK_ROWS)]
    if threads <= 1:
        parts = [fn(block) for block in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, blocks))
    return np.concatenate(parts, axis=0)
