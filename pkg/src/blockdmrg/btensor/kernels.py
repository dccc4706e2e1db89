"""Kernel selection and the contraction thread pool.

At import time the compiled pair-GEMM kernel is preferred; the pure-python
fallback is used when the extension is missing or when the environment
variable ``BLOCKDMRG_PURE_PYTHON`` is set to a truthy value (anything but
empty, "0", or "false").

The thread count for block contractions defaults to ``BLOCKDMRG_THREADS``
(or 1).  Threads parallelize over independent output blocks, so results are
bitwise identical for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

if os.environ.get("BLOCKDMRG_PURE_PYTHON", "").lower() not in ("", "0", "false"):
    from . import _pairs_py as _impl
else:
    try:
        from . import _pairs as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pairs_py as _impl

accumulate_pair_products = _impl.accumulate_pair_products


def kernel_backend() -> str:
    """Which pair kernel is active: "compiled" or "python"."""
    return _impl.BACKEND


_num_threads = max(1, int(os.environ.get("BLOCKDMRG_THREADS", "1")))
_executor = None
_executor_size = 0


def set_num_threads(n: int) -> None:
    global _num_threads
    _num_threads = max(1, int(n))


def get_num_threads() -> int:
    return _num_threads


def run_tasks(tasks):
    """Run callables, each producing one output block, and return their
    results in task order.  Tasks are independent, so scheduling cannot
    change any result."""
    global _executor, _executor_size
    n = _num_threads
    if n <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    if _executor is None or _executor_size != n:
        if _executor is not None:
            _executor.shutdown(wait=False)
        _executor = ThreadPoolExecutor(max_workers=n)
        _executor_size = n
    futures = [_executor.submit(task) for task in tasks]
    return [f.result() for f in futures]
