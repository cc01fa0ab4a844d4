"""Kernel backend selection.

``ANGIOTREE_BACKEND=numpy`` forces the vectorised numpy kernels; the default
is ``numba`` whenever numba imports cleanly.
"""
import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba ships with the package deps
    numba = None

BACKENDS = ("numba", "numpy")

HAVE_NUMBA = numba is not None


def _initial_backend():
    name = os.environ.get("ANGIOTREE_BACKEND", "numba").strip().lower() or "numba"
    if name not in BACKENDS:
        raise ValueError(f"ANGIOTREE_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


_active = _initial_backend()


def njit(fn=None, *, fastmath=False):
    """Compile with numba when available; otherwise yield None.

    Kernels compiled here are never called on the numpy backend, so a missing
    numba only disables that path. ``fastmath`` is reserved for kernels whose
    result is order independent (min/max reductions).
    """
    def wrap(f):
        if not HAVE_NUMBA:
            return None
        return numba.njit(cache=True, nogil=True, fastmath=fastmath)(f)
    if fn is None:
        return wrap
    return wrap(fn)


def active():
    return _active


def set_backend(name):
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _active = name


@contextlib.contextmanager
def use_backend(name):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
