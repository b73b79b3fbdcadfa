"""Select the compiled kernels when built, else the numpy fallback.

Set ``GKPBREED_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("GKPBREED_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

gausspoly_eval = _impl.gausspoly_eval
zak_window_mass = _impl.zak_window_mass


def backends():
    """Return {name: module} for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
