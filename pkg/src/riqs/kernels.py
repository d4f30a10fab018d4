"""Backend selection for the hot state-vector kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Set ``RIQS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("RIQS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

apply_1q = _impl.apply_1q
apply_uniform_1q = _impl.apply_uniform_1q
ising_diagonal = _impl.ising_diagonal
collective_moments = _impl.collective_moments
spin_table = _kernels_py.spin_table

__all__ = [
    "BACKEND",
    "apply_1q",
    "apply_uniform_1q",
    "ising_diagonal",
    "collective_moments",
    "spin_table",
]
