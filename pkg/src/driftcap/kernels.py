"""Strip kernels: the compiled extension when built, pure Python otherwise.

Set DRIFTCAP_PURE_PYTHON=1 to force the fallback.  Both implementations
perform identical float operations, so the choice never changes a result.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("DRIFTCAP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

arc_contains = _impl.arc_contains
find_return = _impl.find_return
find_transfer = _impl.find_transfer
pack_weights = _impl.pack_weights
sum_bounds = _impl.sum_bounds

TWO_PI_LO = _pykernels.TWO_PI_LO
TWO_PI_HI = _pykernels.TWO_PI_HI


def implementations():
    """Every available implementation, keyed by name (for tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
