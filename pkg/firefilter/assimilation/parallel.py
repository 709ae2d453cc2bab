import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

import psutil

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "FIREFILTER_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count from the argument, then FIREFILTER_THREADS, else 1; values <= 0 mean all CPUs."""
    if threads is None:
        raw = os.getenv(THREADS_ENV)
        if raw is None or not raw.strip():
            return 1
        try:
            threads = int(raw)
        except ValueError as e:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from e
    if threads <= 0:
        threads = psutil.cpu_count(logical=True) or 1
    return threads


def map_ordered(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """Applies ``fn`` to every item, in parallel when ``threads > 1``; results keep input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as executor:
        return list(executor.map(fn, items))
