"""Backend selection for the hot training kernels.

The numba backend is used when importable; set NERDUO_BACKEND=numpy to
force the pure numpy path (or NERDUO_BACKEND=numba to fail loudly when
numba is unavailable).  Linear-layer matmuls are not routed through here;
they stay on numpy's BLAS either way.
"""

import importlib
import os

_VALID = ("numba", "numpy")


def load_backend(name: str):
    """Import and return a kernel backend module by name."""
    if name not in _VALID:
        raise ValueError(f"unknown kernel backend {name!r}; expected one of {_VALID}")
    return importlib.import_module(f"{__name__}.{name}_backend")


def _select():
    requested = os.environ.get("NERDUO_BACKEND", "").strip().lower()
    if requested == "":
        try:
            return "numba", load_backend("numba")
        except ImportError:
            return "numpy", load_backend("numpy")
    return requested, load_backend(requested)


BACKEND, _impl = _select()

softmax_xent = _impl.softmax_xent
adam_update = _impl.adam_update
gather_span_reps = _impl.gather_span_reps
