"""Backend selection for the interpolation kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``SDFC_LVT_PURE_PYTHON`` is set, the numpy version is.
"""
import os

from . import _pykernels

if os.environ.get("SDFC_LVT_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"
TAPS = _pykernels.TAPS

sinc_interp_rows = _impl.sinc_interp_rows
trajectory_sum = _impl.trajectory_sum
chirp_rowsums = _impl.chirp_rowsums
