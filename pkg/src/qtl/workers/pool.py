"""
Thread pool dispatch for embarrassingly parallel work.

NumPy/LAPACK release the GIL inside the heavy kernels, so threads give real
parallelism here without pickling composites and operators across processes.
"""

import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Optional, Sequence, TypeVar

import structlog

from qtl.core.exceptions import QtlError

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

MAX_DEFAULT_WORKERS = 20


def resolve_workers(max_workers: Optional[int] = None) -> int:
    """Explicit worker count, or the CPU count capped at 20."""
    if max_workers is not None:
        if max_workers < 1:
            raise QtlError(f"max_workers must be positive, got {max_workers}")
        return max_workers
    return max(1, min(MAX_DEFAULT_WORKERS, os.cpu_count() or 1))


def run_parallel(
    fn: Callable[[T], R],
    tasks: Sequence[T],
    max_workers: Optional[int] = None,
    label: str = "tasks",
) -> list[R]:
    """
    Apply ``fn`` to every task and return results in task order.

    With one worker (or one task) everything runs inline, which keeps
    tracebacks simple. The first exception raised by any task propagates
    after the pool has shut down.

    Args:
        fn: Callable applied to each task
        tasks: Inputs, one per unit of work
        max_workers: Thread count (default: CPU count)
        label: Name used in log events

    Returns:
        ``[fn(task) for task in tasks]``, independent of scheduling
    """
    workers = min(resolve_workers(max_workers), max(len(tasks), 1))
    log = logger.bind(label=label, tasks=len(tasks), workers=workers)

    if workers == 1:
        log.debug("Running inline")
        return [fn(task) for task in tasks]

    log.debug("Dispatching to thread pool")
    results: dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(fn, task): index for index, task in enumerate(tasks)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[index] for index in range(len(tasks))]
