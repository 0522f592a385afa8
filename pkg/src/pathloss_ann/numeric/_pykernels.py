"""Pure-Python kernels.

Reference implementation of every hot kernel. ``_ckernels.pyx`` mirrors these
signatures one for one; the loop order of ``matmul`` is the same in both so
the two backends accumulate each output entry in the same sequence.

All buffers are flat, row-major ``array('d')`` (or any float64 buffer that
supports indexing). Every kernel returns a fresh ``array('d')``.
"""

import math
from array import array
from operator import add as _add, mul as _mul, sub as _sub

RELU = 0
SIGMOID = 1
TANH = 2


def matmul(a, a_rows, a_cols, b, b_cols):
    out = array("d", bytes(8 * a_rows * b_cols))
    for i in range(a_rows):
        base = i * b_cols
        acc = [0.0] * b_cols
        for k in range(a_cols):
            aik = a[i * a_cols + k]
            if aik == 0.0:
                continue
            brow = b[k * b_cols:(k + 1) * b_cols]
            acc = [s + aik * v for s, v in zip(acc, brow)]
        out[base:base + b_cols] = array("d", acc)
    return out


def transpose(a, rows, cols):
    out = array("d", bytes(8 * rows * cols))
    for i in range(rows):
        out[i::rows] = array("d", a[i * cols:(i + 1) * cols])
    return out


def add(a, b):
    return array("d", map(_add, a, b))


def sub(a, b):
    return array("d", map(_sub, a, b))


def hadamard(a, b):
    return array("d", map(_mul, a, b))


def scale(a, k):
    return array("d", [k * v for v in a])


def axpy(alpha, x, y):
    """alpha * x + y."""
    return array("d", [alpha * u + v for u, v in zip(x, y)])


def add_row(a, rows, cols, row):
    out = array("d", a)
    for i in range(rows):
        base = i * cols
        out[base:base + cols] = array("d", map(_add, a[base:base + cols], row))
    return out


def col_sums(a, rows, cols):
    acc = [0.0] * cols
    for i in range(rows):
        acc = [s + v for s, v in zip(acc, a[i * cols:(i + 1) * cols])]
    return array("d", acc)


def dot(a, b):
    s = 0.0
    for u, v in zip(a, b):
        s += u * v
    return s


def sum_squares(a):
    s = 0.0
    for v in a:
        s += v * v
    return s


def norm_inf(a):
    m = 0.0
    for v in a:
        v = abs(v)
        if v > m or v != v:
            m = v
    return m


def _sigmoid(v):
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


def activate(kind, a):
    if kind == RELU:
        return array("d", [v if v > 0.0 else 0.0 for v in a])
    if kind == SIGMOID:
        return array("d", map(_sigmoid, a))
    if kind == TANH:
        return array("d", map(math.tanh, a))
    raise ValueError(f"unknown activation kind {kind}")


def activate_derivative(kind, a):
    if kind == RELU:
        return array("d", [1.0 if v > 0.0 else 0.0 for v in a])
    if kind == SIGMOID:
        out = array("d", bytes(8 * len(a)))
        for i, v in enumerate(a):
            s = _sigmoid(v)
            out[i] = s * (1.0 - s)
        return out
    if kind == TANH:
        out = array("d", bytes(8 * len(a)))
        for i, v in enumerate(a):
            t = math.tanh(v)
            out[i] = 1.0 - t * t
        return out
    raise ValueError(f"unknown activation kind {kind}")


def all_finite(a):
    isfinite = math.isfinite
    for v in a:
        if not isfinite(v):
            return False
    return True
