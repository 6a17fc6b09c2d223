"""Kernel backend selection.

The compiled extension ``_ckernels`` is used when it has been built; otherwise the
NumPy fallback is loaded. Set ``NONLOCAL_NETWORKS_BACKEND=python`` to force the
fallback.
"""
import os

from . import _pykernels

_wanted = os.environ.get("NONLOCAL_NETWORKS_BACKEND", "auto").lower()

if _wanted == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        if _wanted == "cython":
            raise
        _impl = _pykernels
        BACKEND = "python"

lookahead = _impl.lookahead
coupling = _impl.coupling
godunov_interior = _impl.godunov_interior
update = _impl.update

TAG_CODES = {
    "one_to_one": _pykernels.ONE_TO_ONE,
    "one_to_two_maxflux": _pykernels.ONE_TO_TWO_MAXFLUX,
    "one_to_two_distribution": _pykernels.ONE_TO_TWO_DISTRIBUTION,
    "two_to_one_maxflux": _pykernels.TWO_TO_ONE_MAXFLUX,
    "two_to_one_priority": _pykernels.TWO_TO_ONE_PRIORITY,
}


def backends():
    """Available (name, module) pairs, fallback first."""
    found = [("python", _pykernels)]
    try:
        from . import _ckernels

        found.append(("cython", _ckernels))
    except ImportError:
        pass
    return found
