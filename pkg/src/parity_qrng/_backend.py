"""Kernel backend selection.

The environment variable ``PARITY_QRNG_BACKEND`` picks the implementation
of the hot per-pulse kernels:

* ``numba`` -- JIT-compiled scalar loops (the default when numba imports)
* ``numpy`` -- pure-numpy vectorized fallback
* ``auto`` / unset -- numba if available, else numpy

Both backends implement the same draw-consumption contract and produce
bit-identical streams; see ``benchmarks/compare_backends.py`` for speed.
"""

import os

_ENV_VAR = "PARITY_QRNG_BACKEND"


def _select():
    requested = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if requested == "numpy":
        from . import _kernels_numpy
        return "numpy", _kernels_numpy
    if requested == "numba":
        from . import _kernels_numba
        return "numba", _kernels_numba
    if requested == "auto":
        try:
            from . import _kernels_numba
            return "numba", _kernels_numba
        except ImportError:
            from . import _kernels_numpy
            return "numpy", _kernels_numpy
    raise ValueError(
        f"{_ENV_VAR}={requested!r} not understood; use 'numba', 'numpy' or 'auto'"
    )


BACKEND, kernels = _select()


def backend_name() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND
