"""Ordered fan-out of independent evaluations."""

from __future__ import annotations

import logging
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply ``fn`` to every item, returning results in input order.

    With more than one worker the calls run on a thread pool; numpy drops
    the GIL inside its linear-algebra kernels, and threads share the cached
    propagator without pickling it.
    """

    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]

    workers = min(workers, len(items))
    chunksize = max(1, len(items) // (4 * workers))
    logger.info("Dispatching %d evaluations to %d workers", len(items), workers)
    with ThreadPool(workers) as pool:
        return list(pool.imap(fn, items, chunksize=chunksize))
