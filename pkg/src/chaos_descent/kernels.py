"""Backend selection for the array kernels.

The compiled extension is preferred when importable; otherwise the numpy
implementation is used. Set CHAOS_DESCENT_BACKEND=numpy (or =compiled) to
force a choice; forcing `compiled` raises if the extension is missing.
"""

import os

from . import _pykernels

TRIGONOMETRIC_CODE = 0
LEGENDRE_CODE = 1

_requested = os.environ.get("CHAOS_DESCENT_BACKEND", "auto").strip().lower()

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

if _requested in ("auto", ""):
    _impl = _ckernels if _ckernels is not None else _pykernels
elif _requested in ("compiled", "c", "cython"):
    if _ckernels is None:
        raise ImportError(
            "CHAOS_DESCENT_BACKEND=compiled but the extension is not built")
    _impl = _ckernels
elif _requested in ("numpy", "python", "pure"):
    _impl = _pykernels
else:
    raise ValueError(
        f"unrecognized CHAOS_DESCENT_BACKEND value {_requested!r}")

BACKEND = "compiled" if _impl is _ckernels else "numpy"

basis_matrix = _impl.basis_matrix
synthesize_values = _impl.synthesize_values
accumulate_projection = _impl.accumulate_projection


def available_backends():
    """Names of the importable kernel implementations."""
    names = ["numpy"]
    if _ckernels is not None:
        names.insert(0, "compiled")
    return names


def backend_module(name):
    """Fetch a kernel implementation by name (for benchmarking)."""
    if name == "numpy":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
