"""Quadrature kernels with a compiled core and a NumPy fallback.

The backend is chosen once at import time.  The compiled Cython extension is
preferred when it built; set ``RAILBEAM_BACKEND=python`` to force the NumPy
fallback (used by the benchmark and by backend-equivalence tests) or
``RAILBEAM_BACKEND=compiled`` to fail loudly if the extension is missing.
"""

from __future__ import annotations

import os

_requested = os.environ.get("RAILBEAM_BACKEND", "auto").strip().lower()

if _requested not in ("auto", "compiled", "python", ""):
    raise ImportError(f"unknown RAILBEAM_BACKEND value {_requested!r}")

if _requested == "python":
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _ref as _impl

        BACKEND = "python"

eval_quad = _impl.eval_quad
project_quad = _impl.project_quad
cubic_force = _impl.cubic_force
quartic = _impl.quartic
cubic_jacobian_ab = _impl.cubic_jacobian_ab


def backend_name() -> str:
    """Which kernel implementation is live: 'compiled' or 'python'."""
    return BACKEND
