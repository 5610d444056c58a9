"""Kernel selection: compiled module when built, numpy fallback otherwise.

Set HOROKE_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND = "numpy"
_impl = _fallback

if os.environ.get("HOROKE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:
        pass

flux_residual = _impl.flux_residual
banded_jacobian = _impl.banded_jacobian
_legendre = _impl.legendre


def legendre_sorted(a, u, p):
    """Sup-transform for convex u on increasing a, evaluated at increasing p."""
    if BACKEND == "cython":
        return _legendre(a, u, p)
    return _fallback.legendre(a, u, p)
