"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the
pure-Python kernels take over.  Setting ``JACEDGE_BACKEND=python`` forces
the fallback.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def get_backend(name=None):
    """Return the kernel module called ``name`` (``"compiled"`` or ``"python"``)."""
    if name is None:
        name = os.environ.get("JACEDGE_BACKEND", "compiled" if _ckernels else "python")
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    if name == "python":
        return _pykernels
    raise ValueError(f"unknown backend {name!r}")


kernels = get_backend()
BACKEND = "compiled" if kernels is _ckernels else "python"
