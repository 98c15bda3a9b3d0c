"""Backend selection for the hot numerical loops.

The compiled Cython extension is used when present; setting the environment
variable ``BERGKIT_PURE=1`` forces the pure-numpy fallback (used by the
benchmark and by the backend-parity tests).
"""

import os

import numpy as np

from . import _fallback

if os.environ.get("BERGKIT_PURE") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _fast as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback
        BACKEND = "python"

IMPLEMENTATIONS = {"compiled": None, "python": _fallback}
if BACKEND == "compiled":
    IMPLEMENTATIONS["compiled"] = _impl
else:
    try:
        from . import _fast
        IMPLEMENTATIONS["compiled"] = _fast
    except ImportError:
        pass


def poly_eval(coeffs, points):
    """Evaluate sum_n coeffs[n] * points**n; coeffs real, points real or complex.

    Scalars are accepted and returned as scalars.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    pts = np.asarray(points)
    scalar = pts.ndim == 0
    pts = np.atleast_1d(pts)
    if np.iscomplexobj(pts):
        z = np.ascontiguousarray(pts, dtype=np.complex128)
        out = _impl.poly_eval_z(
            coeffs,
            np.ascontiguousarray(z.real),
            np.ascontiguousarray(z.imag),
        )
    else:
        out = _impl.poly_eval_d(coeffs, np.ascontiguousarray(pts, dtype=np.float64))
    return out[0] if scalar else out


def power_moments(r, w, n0, count):
    """m[j] = sum_k w[k]*r[k]**(n0+j) for j in range(count); r in [0, 1)."""
    return _impl.power_moments_d(
        np.ascontiguousarray(r, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        int(n0),
        int(count),
    )
