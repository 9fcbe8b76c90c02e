"""Select the enumeration kernel at import time.

The compiled extension is used when it was built; set
``BYZSHIELD_PURE_PYTHON=1`` to force the pure-Python kernel.
"""

import os

from . import _kernels_py

python_kernel = _kernels_py.max_distortion_range

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

compiled_kernel = _compiled.max_distortion_range if _compiled is not None else None

if compiled_kernel is not None and os.environ.get("BYZSHIELD_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
    max_distortion_range = compiled_kernel
else:
    BACKEND = "python"
    max_distortion_range = python_kernel


def get_kernel(name=None):
    """Return the kernel for ``name`` ("cython", "python" or None for the active one)."""
    if name is None:
        return max_distortion_range
    if name == "python":
        return python_kernel
    if name == "cython":
        if compiled_kernel is None:
            raise ImportError("compiled kernel is not available; build the extension first")
        return compiled_kernel
    raise ValueError(f"unknown backend {name!r}")
