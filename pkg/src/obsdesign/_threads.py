"""Honour OBSDESIGN_THREADS by capping the BLAS/OpenMP pools before numpy loads."""

import os

_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def apply_thread_cap() -> int | None:
    raw = os.environ.get("OBSDESIGN_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    if n < 1:
        return None
    for var in _VARS:
        os.environ[var] = str(n)
    return n
