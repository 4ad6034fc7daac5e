"""Kernel backend selection.

Hot loops are written once as plain Python over numpy arrays and compiled
with numba when available. Setting ``PARCOLOR_BACKEND=numpy`` (or running
without numba installed) routes every dispatching call to the vectorized
numpy fallback instead. The choice can also be flipped at runtime with
:func:`set_backend` / :func:`using`, which the test suite and the backend
benchmark rely on.
"""

from __future__ import annotations

import contextlib
import os

# TBB on many distros is too old for numba; try it last.
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    import numba
    from numba import prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    prange = range
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")
_active = os.environ.get("PARCOLOR_BACKEND", "numba").strip().lower() or "numba"
if _active not in _VALID:
    raise ValueError(f"PARCOLOR_BACKEND must be one of {_VALID}, got {_active!r}")
if not HAVE_NUMBA:
    _active = "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def jit_pair(func):
    """Compile ``func`` twice: a serial kernel and a ``parallel=True`` one.

    The serial variant runs ``prange`` as an ordinary in-order loop, which is
    what single-worker runs use so their schedule is exactly program order.
    """
    if not HAVE_NUMBA:
        return func, func
    return numba.njit(cache=True)(func), numba.njit(cache=True, parallel=True)(func)


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _active = name


def use_numba() -> bool:
    return _active == "numba"


@contextlib.contextmanager
def using(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def max_workers() -> int:
    """Machine parallelism: usable CPUs for this process."""
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-Linux
        return max(1, os.cpu_count() or 1)


def thread_limit() -> int:
    """Largest thread count the compiled runtime will accept."""
    if HAVE_NUMBA:
        return int(numba.config.NUMBA_NUM_THREADS)
    return 1


@contextlib.contextmanager
def threads(workers: int):
    """Run the enclosed parallel kernels on ``workers`` threads (clamped)."""
    if not HAVE_NUMBA:
        yield 1
        return
    n = max(1, min(int(workers), thread_limit()))
    prev = numba.get_num_threads()
    numba.set_num_threads(n)
    try:
        yield n
    finally:
        numba.set_num_threads(prev)
