"""
Ordered fan-out of independent jobs across worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def split_even(n: int, parts: int) -> List[range]:
    """Split range(n) into at most `parts` contiguous, nearly equal, non-empty ranges."""
    parts = max(1, min(parts, n)) if n else 1
    base, extra = divmod(n, parts)
    ranges, start = [], 0
    for i in range(parts):
        stop = start + base + (1 if i < extra else 0)
        ranges.append(range(start, stop))
        start = stop
    return [r for r in ranges if len(r)]


def ordered_map(fn: Callable[[T], R], jobs: Sequence[T], workers: int = 1) -> List[R]:
    """map(fn, jobs) with results in job order; runs in-process for one worker."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))
