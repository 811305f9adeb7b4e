"""Worker pool for independent samples, runs and sweep points."""

from qtl.workers.pool import resolve_workers, run_parallel

__all__ = [
    "resolve_workers",
    "run_parallel",
]
