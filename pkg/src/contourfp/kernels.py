"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the numpy
fallback. Set ``CONTOURFP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("CONTOURFP_PURE_PYTHON"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _fallback

fps_indices = _impl.fps_indices
pair_distance_histogram = _impl.pair_distance_histogram


def backends():
    """Map of every available backend name to its kernel module."""
    found = {"python": _fallback}
    if _compiled is not None:
        found["cython"] = _compiled
    return found
