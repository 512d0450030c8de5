"""Serial-BLAS context for small-matrix hot loops.

Threaded BLAS handoff overhead dwarfs the O(N^3) work at the design sizes
used here (observed ~30x on 2 cores for N=128), so the fitting paths pin
BLAS to one thread; parallelism happens across campaign cells instead.
"""

import contextlib

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None


def single_thread_blas():
    if threadpool_limits is None:
        return contextlib.nullcontext()
    return threadpool_limits(limits=1, user_api="blas")
