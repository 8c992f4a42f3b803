"""Hot numerical kernels with a compiled core and a pure-Python fallback.

The Cython extension ``rmtkit.kernels._fast`` is used when available; set
``RMTKIT_BACKEND=python`` to force the numpy reference implementation.
``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import reference

if os.environ.get("RMTKIT_BACKEND", "").lower() == "python":
    _impl = reference
else:
    try:
        from . import _fast as _impl
    except ImportError:
        _impl = reference

BACKEND = _impl.BACKEND
KernelConvergenceError = _impl.KernelConvergenceError
ewma_resolvent_grid = _impl.ewma_resolvent_grid
dressed_resolvent_grid = _impl.dressed_resolvent_grid
track_top = _impl.track_top

__all__ = [
    "BACKEND",
    "KernelConvergenceError",
    "ewma_resolvent_grid",
    "dressed_resolvent_grid",
    "track_top",
    "reference",
]
