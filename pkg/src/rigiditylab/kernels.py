"""
Kernel dispatch: the compiled extension when it was built, numpy otherwise.

Set RIGIDITYLAB_PURE_PYTHON=1 to force the numpy path.
"""
import os

from . import _kernels_py

if os.environ.get("RIGIDITYLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

update_best_inner = _impl.update_best_inner
torus_min_gap = _impl.torus_min_gap
