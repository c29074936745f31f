"""Kernel selection.

The compiled ``_core`` extension is used when it imports; otherwise the numpy
fallback. ``NLGLRT_BACKEND=python`` forces the fallback (used by tests and the
benchmark to exercise both paths in one interpreter).
"""
import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

KERNELS = {"python": _fallback}
if _core is not None:
    KERNELS["compiled"] = _core

_requested = os.environ.get("NLGLRT_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "compiled"):
    raise ImportError(f"NLGLRT_BACKEND must be 'python' or 'compiled', got {_requested!r}")
if _requested == "compiled" and _core is None:
    raise ImportError("NLGLRT_BACKEND=compiled but nlglrt._core is not built")

BACKEND = _requested or ("compiled" if _core is not None else "python")


def kernels(name=None):
    """Return the kernel module for ``name`` (default: the selected backend)."""
    return KERNELS[name or BACKEND]
