"""Integrator backend selection.

The compiled Cython core is preferred; the pure-numpy fallback implements
the identical algorithm.  Set SPINPUMP_BACKEND=python (or =cython) to force
a choice; forcing cython when the extension is missing raises ImportError.
"""

import os

from . import _fallback

_requested = os.environ.get("SPINPUMP_BACKEND", "").lower()

if _requested == "python":
    _impl = _fallback
elif _requested == "cython":
    from . import _core as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback

BACKEND_NAME = _impl.BACKEND_NAME
STATUS_OK = _fallback.STATUS_OK
STATUS_UNDERFLOW = _fallback.STATUS_UNDERFLOW

integrate_master_grid = _impl.integrate_master_grid
integrate_bloch_grid = _impl.integrate_bloch_grid
dp54 = _fallback.dp54  # generic callable-RHS integrator (lab-frame checks)


def available_backends():
    names = ["python"]
    try:
        from . import _core  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names
