"""Thread-count configuration and an order-preserving parallel map.

Work is always split into chunks whose boundaries depend only on the problem
size, never on the number of workers, so integer totals are identical for any
thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "POLYCONG_THREADS"

_override: int | None = None


def set_threads(n: int | None) -> None:
    """Process-wide override of the worker count (``None`` restores the default)."""
    global _override
    if n is not None and n < 1:
        raise ValueError("thread count must be positive")
    _override = n


def thread_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    if _override is not None:
        return _override
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return max(1, os.cpu_count() or 1)


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``[fn(x) for x in items]`` evaluated on a thread pool, results in input order."""
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(start: int, stop: int, size: int) -> list[tuple[int, int]]:
    """Half-open ``[a, b)`` chunks of at most ``size`` covering ``[start, stop)``."""
    size = max(1, int(size))
    return [(a, min(a + size, stop)) for a in range(start, stop, size)]


def split_evenly(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    return [seq[i:i + size] for i in range(0, len(seq), max(1, size))]
