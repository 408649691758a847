"""Polynomial term-dict kernels: compiled core with pure-Python fallback.

The compiled extension is preferred; set WEBRANK_PURE_KERNEL=1 to force the
fallback (used by the parity tests and the benchmark).
"""

import os

if os.environ.get("WEBRANK_PURE_KERNEL") == "1":
    from . import _poly_py as _impl
else:
    try:
        from . import _poly_core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _poly_py as _impl

BACKEND = _impl.BACKEND
td_add = _impl.td_add
td_sub = _impl.td_sub
td_scale = _impl.td_scale
td_mul = _impl.td_mul
