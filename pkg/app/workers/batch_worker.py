"""Ordered thread-pool map for independent simulation runs.

Results are stored by input index, so anything summed over them afterwards
is identical whatever the worker count or completion order.
"""
import logging
import os
from concurrent.futures import CancelledError, ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, Optional, TypeVar

log = logging.getLogger("cvdyn.batch_worker")

T = TypeVar("T")
R = TypeVar("R")

ProgressCallback = Callable[[int, int], None]  # done, total


def worker_count(threads: int = 0) -> int:
    """Threads for batch runs; 0 = auto, one below the core count, 1-8."""
    if threads and threads > 0:
        return int(threads)
    return max(1, min(8, (os.cpu_count() or 2) - 1))


def run_ordered(
    fn: Callable[[T], R],
    items: Iterable[T],
    threads: int = 0,
    cancel_check: Optional[Callable[[], bool]] = None,
    progress_cb: Optional[ProgressCallback] = None,
) -> list[R]:
    """[fn(item) for item in items], computed on a thread pool.

    The first exception raised by any call propagates.
    """
    items = list(items)
    total = len(items)
    results: list = [None] * total
    workers = min(worker_count(threads), max(1, total))

    if workers == 1:
        for i, item in enumerate(items):
            if cancel_check and cancel_check():
                raise CancelledError()
            results[i] = fn(item)
            if progress_cb:
                progress_cb(i + 1, total)
        return results

    done = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        future_to_index = {pool.submit(fn, item): i for i, item in enumerate(items)}
        for future in as_completed(future_to_index):
            if cancel_check and cancel_check():
                pool.shutdown(wait=False, cancel_futures=True)
                raise CancelledError()
            results[future_to_index[future]] = future.result()
            done += 1
            if progress_cb and (done % 50 == 0 or done == total):
                progress_cb(done, total)
    log.debug("Ran %d items on %d threads", total, workers)
    return results
