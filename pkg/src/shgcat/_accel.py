"""Numba switch.

Set ``SHGCAT_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""

import os


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()
DISABLED = os.environ.get("SHGCAT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = HAVE_NUMBA and not DISABLED

if HAVE_NUMBA:
    import numba
    from numba import njit, prange

    # the bundled TBB is too old; skip probing it
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
else:
    njit = _noop_jit
    prange = range


def set_threads(n):
    """Cap numba worker threads. No-op on the numpy path."""
    if n is None or not HAVE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def get_threads():
    if not HAVE_NUMBA:
        return 1
    import numba

    return numba.get_num_threads()
