"""Hot numerical kernels with a compiled backend and a NumPy fallback.

The compiled extension is used when importable; set ``GASLOC_PURE_PYTHON=1``
to force the fallback. ``BACKEND`` names the active implementation.
"""

import os

from . import _pure

try:
    if os.environ.get("GASLOC_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend forced")
    from . import _ext as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pure
    BACKEND = "python"

solve_range = _impl.solve_range
solve_tdoa = _impl.solve_tdoa
dop_batch = _impl.dop_batch


def backends():
    """Mapping of available backend name -> module."""
    out = {"python": _pure}
    try:
        from . import _ext

        out["cython"] = _ext
    except ImportError:
        pass
    return out
