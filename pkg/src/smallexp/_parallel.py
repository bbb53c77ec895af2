from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

TASKS_ENV = "SMALLEXP_TASKS"


def default_tasks() -> int:
    env = os.environ.get(TASKS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Iterable[T], tasks: int | None = None) -> list[R]:
    """Order-preserving map, in worker processes when tasks > 1."""
    items = list(items)
    tasks = default_tasks() if tasks is None else tasks
    if tasks <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(tasks, len(items))) as ex:
        return list(ex.map(fn, items, chunksize=1))
