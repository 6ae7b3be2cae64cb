"""Optional process-level parallelism, sized by the NILOPS_THREADS environment variable.

Results are always returned in input order, so output does not depend on the
number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "NILOPS_THREADS"


def workers() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable[..., R], *arglists: Iterable) -> list[R]:
    jobs = list(zip(*arglists))
    n = min(workers(), len(jobs))
    if n <= 1:
        return [fn(*a) for a in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, *zip(*jobs)))
