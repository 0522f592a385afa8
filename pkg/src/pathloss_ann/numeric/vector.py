"""Flat float64 parameter vectors (``array('d')``) for the optimizers."""

import math
from array import array

from . import _backend


def as_vector(values):
    return array("d", values)


def dot(a, b):
    if len(a) != len(b):
        raise ValueError(f"dot: lengths {len(a)} and {len(b)} differ")
    return _backend.kernels.dot(a, b)


def axpy(alpha, x, y):
    """Return ``alpha * x + y`` as a new vector."""
    if len(x) != len(y):
        raise ValueError(f"axpy: lengths {len(x)} and {len(y)} differ")
    return _backend.kernels.axpy(float(alpha), x, y)


def sub(a, b):
    return _backend.kernels.sub(a, b)


def scale(a, k):
    return _backend.kernels.scale(a, float(k))


def norm2(a):
    return math.sqrt(_backend.kernels.sum_squares(a))


def norm_inf(a):
    return _backend.kernels.norm_inf(a)


def all_finite(a):
    return _backend.kernels.all_finite(a)
