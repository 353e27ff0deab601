"""Backend selection for the hot geometric kernels.

The compiled ``_ckernels`` module is used when it was built; otherwise the
numpy versions in ``_pykernels`` are used. Set ``REACHSEG_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("REACHSEG_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

min_dist_to_segments = _impl.min_dist_to_segments
even_odd_contains = _impl.even_odd_contains
scanline_fill = _impl.scanline_fill
first_crossing = _impl.first_crossing


def backends():
    """Map of available backend name -> module."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
