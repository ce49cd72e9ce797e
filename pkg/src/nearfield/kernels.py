"""Backend selection for the correlation kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Setting ``NEARFIELD_PURE_PYTHON=1`` forces the fallback.
"""

import logging
import os

from . import _kernels_py

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("NEARFIELD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels_c as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        log.debug("compiled kernels unavailable, using numpy fallback")

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

correlate = _impl.correlate
pair_gains = _impl.pair_gains


def backends():
    """Map of available backend name -> module, for tests and benchmarks."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    else:
        try:
            from . import _kernels_c

            out["cython"] = _kernels_c
        except ImportError:
            pass
    return out
