from __future__ import annotations

import os
from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed, parallel_config
from threadpoolctl import threadpool_limits

from src.utils.numbers import safe_int

THREADS_ENV = "GRACE_INFER_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(requested: Optional[int] = None) -> int:
    """Explicit request, then ``GRACE_INFER_THREADS``, then the CPU count."""
    if requested is not None:
        if requested < 1:
            raise ValueError(f"thread count must be positive, got {requested}")
        return requested
    from_env = safe_int(os.environ.get(THREADS_ENV))
    if from_env is not None and from_env >= 1:
        return from_env
    return os.cpu_count() or 1


def run_ordered(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Map ``func`` over ``items`` and return results in input order.

    BLAS runs single-threaded in every worker so results do not depend on
    the worker count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        with threadpool_limits(limits=1):
            return [func(item) for item in items]
    with parallel_config(backend="loky", inner_max_num_threads=1):
        return Parallel(n_jobs=min(threads, len(items)))(delayed(func)(item) for item in items)
