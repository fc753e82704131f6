"""Kernel selection: the compiled extension when importable, else the pure-Python twin.

Set ``CUBECAT_PURE=1`` to force the fallback.
"""

import os

from . import _pure

if os.environ.get("CUBECAT_PURE"):
    kernels = _pure
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pure

BACKEND = kernels.NAME

__all__ = ["BACKEND", "kernels"]
