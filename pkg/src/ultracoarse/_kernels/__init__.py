"""Backend dispatch for the hot integer kernels.

``ULTRACOARSE_BACKEND=numpy`` forces the pure-numpy path; ``numba`` (the
default when numba imports) uses the compiled kernels.  Results are identical
either way.  Object-dtype matrices (values beyond int64 headroom) always take
the numpy path.
"""
import os

import numpy as np

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is optional at runtime
    _numba = None

_requested = os.environ.get("ULTRACOARSE_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"unknown ULTRACOARSE_BACKEND {_requested!r}")
if _requested == "numba" and _numba is None:
    raise ImportError("ULTRACOARSE_BACKEND=numba but numba is not importable")

BACKEND = "numpy" if (_requested == "numpy" or _numba is None) else "numba"


_INT64_MAX = int(np.iinfo(np.int64).max)


def _impl(a):
    if BACKEND == "numba" and a.dtype == np.int64:
        return _numba
    return _numpy


def triangle_violations(a):
    return _impl(a).triangle_violations(a)


def ultrametric_violations(a):
    return _impl(a).ultrametric_violations(a)


def isosceles_violations(a):
    return _impl(a).isosceles_violations(a)


def components_below(a, threshold):
    impl = _impl(a)
    if impl is _numba:
        return _numba.components_below(a, np.int64(min(threshold, _INT64_MAX)))
    return _numpy.components_below(a, threshold)


def minimax_matrix(a):
    return _impl(a).minimax_matrix(a)


def backends():
    """Names of the kernel modules importable in this process."""
    return {"numpy": _numpy, **({"numba": _numba} if _numba is not None else {})}
