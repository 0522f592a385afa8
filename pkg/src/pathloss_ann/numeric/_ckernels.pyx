# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Signatures and loop order mirror ``_pykernels``."""

from cpython cimport array
import array

from libc.math cimport exp, tanh, fabs, isfinite

cdef int RELU = 0
cdef int SIGMOID = 1
cdef int TANH = 2

cdef array.array _template = array.array("d")


cdef inline array.array _empty(Py_ssize_t n):
    return array.clone(_template, n, zero=False)


cdef inline array.array _zeros(Py_ssize_t n):
    return array.clone(_template, n, zero=True)


def matmul(const double[::1] a, Py_ssize_t a_rows, Py_ssize_t a_cols,
           const double[::1] b, Py_ssize_t b_cols):
    cdef array.array out = _zeros(a_rows * b_cols)
    cdef double* o = out.data.as_doubles
    cdef Py_ssize_t i, k, j
    cdef double aik
    cdef double* orow
    cdef const double* brow
    with nogil:
        for i in range(a_rows):
            orow = o + i * b_cols
            for k in range(a_cols):
                aik = a[i * a_cols + k]
                if aik == 0.0:
                    continue
                brow = &b[k * b_cols]
                for j in range(b_cols):
                    orow[j] = orow[j] + aik * brow[j]
    return out


def transpose(const double[::1] a, Py_ssize_t rows, Py_ssize_t cols):
    cdef array.array out = _empty(rows * cols)
    cdef double* o = out.data.as_doubles
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[j * rows + i] = a[i * cols + j]
    return out


def add(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    with nogil:
        for i in range(n):
            o[i] = a[i] + b[i]
    return out


def sub(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    with nogil:
        for i in range(n):
            o[i] = a[i] - b[i]
    return out


def hadamard(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    with nogil:
        for i in range(n):
            o[i] = a[i] * b[i]
    return out


def scale(const double[::1] a, double k):
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    with nogil:
        for i in range(n):
            o[i] = k * a[i]
    return out


def axpy(double alpha, const double[::1] x, const double[::1] y):
    """alpha * x + y."""
    cdef Py_ssize_t n = x.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    with nogil:
        for i in range(n):
            o[i] = alpha * x[i] + y[i]
    return out


def add_row(const double[::1] a, Py_ssize_t rows, Py_ssize_t cols,
            const double[::1] row):
    cdef array.array out = _empty(rows * cols)
    cdef double* o = out.data.as_doubles
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[i * cols + j] = a[i * cols + j] + row[j]
    return out


def col_sums(const double[::1] a, Py_ssize_t rows, Py_ssize_t cols):
    cdef array.array out = _zeros(cols)
    cdef double* o = out.data.as_doubles
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(rows):
            for j in range(cols):
                o[j] = o[j] + a[i * cols + j]
    return out


def dot(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef double s = 0.0
    with nogil:
        for i in range(n):
            s += a[i] * b[i]
    return s


def sum_squares(const double[::1] a):
    cdef Py_ssize_t n = a.shape[0], i
    cdef double s = 0.0
    with nogil:
        for i in range(n):
            s += a[i] * a[i]
    return s


def norm_inf(const double[::1] a):
    cdef Py_ssize_t n = a.shape[0], i
    cdef double m = 0.0, v
    with nogil:
        for i in range(n):
            v = fabs(a[i])
            if v > m or v != v:
                m = v
    return m


cdef inline double _sigmoid(double v) nogil:
    cdef double e
    if v >= 0.0:
        return 1.0 / (1.0 + exp(-v))
    e = exp(v)
    return e / (1.0 + e)


def activate(int kind, const double[::1] a):
    if kind != RELU and kind != SIGMOID and kind != TANH:
        raise ValueError(f"unknown activation kind {kind}")
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    cdef double v
    with nogil:
        if kind == RELU:
            for i in range(n):
                v = a[i]
                o[i] = v if v > 0.0 else 0.0
        elif kind == SIGMOID:
            for i in range(n):
                o[i] = _sigmoid(a[i])
        else:
            for i in range(n):
                o[i] = tanh(a[i])
    return out


def activate_derivative(int kind, const double[::1] a):
    if kind != RELU and kind != SIGMOID and kind != TANH:
        raise ValueError(f"unknown activation kind {kind}")
    cdef Py_ssize_t n = a.shape[0], i
    cdef array.array out = _empty(n)
    cdef double* o = out.data.as_doubles
    cdef double s
    with nogil:
        if kind == RELU:
            for i in range(n):
                o[i] = 1.0 if a[i] > 0.0 else 0.0
        elif kind == SIGMOID:
            for i in range(n):
                s = _sigmoid(a[i])
                o[i] = s * (1.0 - s)
        else:
            for i in range(n):
                s = tanh(a[i])
                o[i] = 1.0 - s * s
    return out


def all_finite(const double[::1] a):
    cdef Py_ssize_t n = a.shape[0], i
    cdef bint ok = True
    with nogil:
        for i in range(n):
            if not isfinite(a[i]):
                ok = False
                break
    return ok
