"""Backend selection for the grid kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``WIGNERKIN_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.  ``BACKEND`` names the active
choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("WIGNERKIN_PURE_PYTHON", "") not in ("", "0")

IMPORT_ERROR = None
try:
    if _force_python:
        raise ImportError("pure-python backend requested")
    from . import _kernels as _impl
    BACKEND = "compiled"
except ImportError as exc:
    IMPORT_ERROR = exc
    _impl = _pykernels
    BACKEND = "python"

cat_grid = _impl.cat_grid
gauss_grid = _impl.gauss_grid
line_integrals = _impl.line_integrals

__all__ = ["BACKEND", "cat_grid", "gauss_grid", "line_integrals"]
