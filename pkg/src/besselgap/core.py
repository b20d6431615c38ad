"""Backend selection for the hot numerical kernels.

The compiled Cython core (_corecy) is preferred when it was built; the pure
NumPy twin (_corepy) is the fallback and the reference.  Set the environment
variable BESSELGAP_BACKEND=pure or =cython before import to force a choice
(=cython raises if the extension is missing).
"""

import os

from . import _corepy

_requested = os.environ.get("BESSELGAP_BACKEND", "").strip().lower()

if _requested == "pure":
    _impl = _corepy
elif _requested == "cython":
    from . import _corecy as _impl
else:
    try:
        from . import _corecy as _impl
    except ImportError:
        _impl = _corepy

bessel_j_pair = _impl.bessel_j_pair
bessel_kernel_point = _impl.bessel_kernel_point
bessel_kernel_matrix = _impl.bessel_kernel_matrix
pv_accel = _impl.pv_accel
tilde_accel = _impl.tilde_accel
SINGULAR_TOL = _impl.SINGULAR_TOL


def backend_name():
    """Name of the active kernel backend, "pure" or "cython"."""
    return _impl.BACKEND
