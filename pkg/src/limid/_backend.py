"""Kernel backend selection.

The compiled module is used when it imports; set ``LIMID_PURE_PYTHON=1`` to
force the numpy fallback. ``use()`` switches at runtime (tests and benchmarks
run both).
"""
import os

from limid import _pykernels

try:
    from limid import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_MODULES = {"python": _pykernels}
if _ckernels is not None:
    _MODULES["compiled"] = _ckernels

kernels = _pykernels if os.environ.get("LIMID_PURE_PYTHON") or _ckernels is None else _ckernels


def available():
    return sorted(_MODULES)


def name():
    return "compiled" if kernels is _ckernels and _ckernels is not None else "python"


def use(backend):
    """Select ``"python"`` or ``"compiled"``; returns the previous backend name."""
    global kernels
    if backend not in _MODULES:
        raise ValueError(f"backend {backend!r} not available (have {available()})")
    previous = name()
    kernels = _MODULES[backend]
    return previous
