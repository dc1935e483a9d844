"""Pick the compiled kernels when available.

Set ``TUNNELMOMENTS_BACKEND=python`` to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
System = _kernels_py.System

if os.environ.get("TUNNELMOMENTS_BACKEND", "").lower() != "python":
    try:
        from . import _kernels
    except ImportError:  # extension not built
        _kernels = None
    else:
        System = _kernels.System
        BACKEND = "cython"


def system_class(name=None):
    """Kernel class for ``name`` (``"cython"``/``"python"``; default: active)."""
    if name is None:
        return System
    if name == "python":
        return _kernels_py.System
    if name == "cython":
        from . import _kernels as mod

        return mod.System
    raise ValueError(f"unknown backend {name!r}")
