"""Select the compiled kernels when available; ``CRLAB_PURE=1`` forces numpy."""

import os

BACKEND = "python"
if os.environ.get("CRLAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = None
else:
    _impl = None

if _impl is None:
    from . import _pycore as _impl

log_moments = _impl.log_moments
diagonal_log_sums = _impl.diagonal_log_sums
