"""Backend selection for the log-Delta grid kernel.

The compiled extension is used when importable; setting the environment
variable ``CASIMIRSTACK_PURE_PYTHON=1`` forces the NumPy fallback.
"""
import os

from . import _kernel_py

BACKEND = "python"
log_delta_grid = _kernel_py.log_delta_grid

if os.environ.get("CASIMIRSTACK_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernel
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        log_delta_grid = _kernel.log_delta_grid

__all__ = ["BACKEND", "log_delta_grid"]
