"""Kernel backend selection.

The hot kernels exist twice: numba-compiled (``_kernels_numba``) and pure
numpy (``_kernels_numpy``). The environment variable ``SWSC_BACKEND`` picks
one at import time:

    SWSC_BACKEND=numba   force the compiled path (ImportError if numba is missing)
    SWSC_BACKEND=numpy   force the fallback
    unset / empty        numba when importable, numpy otherwise

Both paths are deterministic for fixed inputs; they may differ from each
other in the last bits of floating-point results.
"""

import os

from .errors import ParameterError

_requested = os.environ.get("SWSC_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ParameterError(
        f"SWSC_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _kernels_numpy as _impl

    _active = "numpy"
elif _requested == "numba":
    from . import _kernels_numba as _impl

    _active = "numba"
else:
    try:
        from . import _kernels_numba as _impl

        _active = "numba"
    except ImportError:
        from . import _kernels_numpy as _impl

        _active = "numpy"


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return _active


pairwise_sq_dists = _impl.pairwise_sq_dists
assign_labels = _impl.assign_labels
accumulate_clusters = _impl.accumulate_clusters
jacobi_sweeps = _impl.jacobi_sweeps
matmul = _impl.matmul
