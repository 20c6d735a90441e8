"""Select the compiled kernels when available, the pure-Python ones otherwise.

Set ``DODA_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

if os.environ.get("DODA_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _pykernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

BACKEND = "cython" if kernels is not _pykernels else "python"


def available_backends() -> dict:
    found = {"python": _pykernels}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["cython"] = _kernels
    return found


def meet_time_columns(us, vs, n, backend=None):
    k = backend or kernels
    mu = np.empty(len(us), dtype=np.int64)
    mv = np.empty(len(us), dtype=np.int64)
    k.meet_times(np.ascontiguousarray(us), np.ascontiguousarray(vs), n, mu, mv)
    return mu, mv
