from __future__ import annotations

import concurrent.futures
import logging
import os
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def _threads_from_env(value: Optional[str]) -> int:
    default = os.cpu_count() or 1
    if value is None or value == '':
        return default
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads < 1:
        logger.warning('ignoring LPQ_THREADS=%r, using %d threads', value, default)
        return default
    return threads


THREADS = _threads_from_env(os.environ.get('LPQ_THREADS'))


def pool_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """Map ``fn`` over ``items`` on a thread pool; results keep the input order"""
    items = list(items)
    threads = min(threads or THREADS, len(items))
    if threads <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))
