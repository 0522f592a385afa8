"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module. ``PATHLOSS_ANN_BACKEND`` may force either
(``cython`` or ``python``); ``auto`` is the default.
"""

import contextlib
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels


def available():
    return sorted(_BACKENDS)


def _resolve(name):
    if name == "auto":
        return "cython" if "cython" in _BACKENDS else "python"
    if name not in ("python", "cython"):
        raise ValueError(f"unknown backend {name!r}; expected auto, python or cython")
    if name not in _BACKENDS:
        raise ImportError("compiled kernels are not built; run `pip install -e .`")
    return name


name = _resolve(os.environ.get("PATHLOSS_ANN_BACKEND", "auto"))
kernels = _BACKENDS[name]


def set_backend(requested):
    """Switch the process-wide kernel backend; returns the previous name."""
    global name, kernels
    previous = name
    name = _resolve(requested)
    kernels = _BACKENDS[name]
    return previous


@contextlib.contextmanager
def use_backend(requested):
    previous = set_backend(requested)
    try:
        yield
    finally:
        set_backend(previous)
