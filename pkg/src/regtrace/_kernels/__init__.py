"""Summation kernels with a compiled backend and a NumPy fallback.

The compiled extension is used when it imports; set ``REGTRACE_PURE=1`` to
force the NumPy path.
"""
import os

from . import _pykernels

_compiled = None
if os.environ.get("REGTRACE_PURE", "") != "1":
    try:
        from . import _ckernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _pykernels


def backends():
    """Mapping name -> module for every importable backend."""
    out = {"python": _pykernels}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


def abel_root_sums(n, r, K):
    return _impl.abel_root_sums(int(n), float(r), int(K))


def abel_trace_sums(n, nu, X, Y, r, K):
    return _impl.abel_trace_sums(int(n), int(nu), X, Y, float(r), int(K))
