"""Worker-pool helpers honoring the PDBPE_THREADS cap."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import DataError

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "PDBPE_THREADS"


def thread_count() -> int:
    """Worker cap from PDBPE_THREADS; 0 or unset means auto (cpu count)."""
    raw = os.environ.get(ENV_VAR, "0").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        raise DataError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 0:
        raise DataError(f"{ENV_VAR} must be >= 0, got {n}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map a pure function over items with results in input order.

    Fans out to a thread pool bounded by PDBPE_THREADS; because results are
    collected in input order, output is identical for any worker count.
    """
    items = list(items)
    workers = min(thread_count(), len(items)) or 1
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 4))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
