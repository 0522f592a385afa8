"""Immutable dense float64 matrices in row-major, sample-per-row layout."""

from __future__ import annotations

import math
from array import array
from typing import Iterable, Sequence

from . import _backend


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


def _k():
    return _backend.kernels


class Matrix:
    """A rows x cols matrix of float64 values.

    Instances are never mutated after construction, so they can be shared
    freely (including across threads). Arithmetic never broadcasts; the one
    exception is :meth:`add_row`, which adds a 1 x cols row to every row.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, data: Iterable[float] | None = None):
        if rows < 0 or cols < 0:
            raise ShapeError(f"negative shape ({rows}, {cols})")
        if data is None:
            buf = array("d", bytes(8 * rows * cols))
        else:
            buf = array("d", data)
        if len(buf) != rows * cols:
            raise ShapeError(
                f"data length {len(buf)} does not match shape ({rows}, {cols})"
            )
        self.rows = rows
        self.cols = cols
        self._data = buf

    @classmethod
    def _wrap(cls, rows: int, cols: int, buf: array) -> Matrix:
        # takes ownership of buf without copying
        m = cls.__new__(cls)
        m.rows = rows
        m.cols = cols
        m._data = buf
        return m

    # construction helpers

    @classmethod
    def zeros(cls, rows: int, cols: int) -> Matrix:
        return cls(rows, cols)

    @classmethod
    def full(cls, rows: int, cols: int, value: float) -> Matrix:
        return cls._wrap(rows, cols, array("d", [float(value)]) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> Matrix:
        m = array("d", bytes(8 * n * n))
        for i in range(n):
            m[i * n + i] = 1.0
        return cls._wrap(n, n, m)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> Matrix:
        if not rows:
            return cls(0, 0)
        ncols = len(rows[0])
        buf = array("d")
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise ShapeError(f"row {i} has {len(r)} entries, expected {ncols}")
            buf.extend(float(v) for v in r)
        return cls._wrap(len(rows), ncols, buf)

    @classmethod
    def column(cls, values: Iterable[float]) -> Matrix:
        buf = array("d", values)
        return cls._wrap(len(buf), 1, buf)

    @classmethod
    def row(cls, values: Iterable[float]) -> Matrix:
        buf = array("d", values)
        return cls._wrap(1, len(buf), buf)

    # access

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def data(self) -> memoryview:
        """Read-only row-major view of the entries."""
        return memoryview(self._data).toreadonly()

    def __getitem__(self, index: tuple[int, int]) -> float:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index ({i}, {j}) out of range for shape {self.shape}")
        return self._data[i * self.cols + j]

    def tolist(self) -> list[list[float]]:
        c = self.cols
        return [self._data[i * c:(i + 1) * c].tolist() for i in range(self.rows)]

    def ravel(self) -> list[float]:
        return self._data.tolist()

    def row_slice(self, start: int, stop: int) -> Matrix:
        start, stop, _ = slice(start, stop).indices(self.rows)
        stop = max(start, stop)
        c = self.cols
        return Matrix._wrap(stop - start, c, self._data[start * c:stop * c])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        if self.rows * self.cols <= 36:
            return f"Matrix({self.tolist()!r})"
        return f"Matrix(<{self.rows}x{self.cols}>)"

    # arithmetic

    def _same_shape(self, other: Matrix, op: str) -> None:
        if self.shape != other.shape:
            raise ShapeError(f"{op}: shapes {self.shape} and {other.shape} differ")

    def __add__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same_shape(other, "add")
        return Matrix._wrap(self.rows, self.cols, _k().add(self._data, other._data))

    def __sub__(self, other: Matrix) -> Matrix:
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same_shape(other, "sub")
        return Matrix._wrap(self.rows, self.cols, _k().sub(self._data, other._data))

    def __mul__(self, k: float) -> Matrix:
        if isinstance(k, Matrix):
            raise TypeError("use hadamard() for elementwise products")
        return Matrix._wrap(self.rows, self.cols, _k().scale(self._data, float(k)))

    __rmul__ = __mul__

    def __neg__(self) -> Matrix:
        return self * -1.0

    def __matmul__(self, other: Matrix) -> Matrix:
        return matmul(self, other)

    @property
    def T(self) -> Matrix:
        return transpose(self)

    def hadamard(self, other: Matrix) -> Matrix:
        return hadamard(self, other)

    def add_row(self, row: Matrix) -> Matrix:
        """Add the 1 x cols matrix ``row`` to every row (explicit bias broadcast)."""
        if row.rows != 1 or row.cols != self.cols:
            raise ShapeError(f"add_row: row shape {row.shape} does not fit {self.shape}")
        return Matrix._wrap(
            self.rows, self.cols, _k().add_row(self._data, self.rows, self.cols, row._data)
        )

    # reductions

    def col_sums(self) -> Matrix:
        return Matrix._wrap(1, self.cols, _k().col_sums(self._data, self.rows, self.cols))

    def col_mean(self) -> Matrix:
        if self.rows == 0:
            raise ShapeError("col_mean of a matrix with no rows")
        return self.col_sums() * (1.0 / self.rows)

    def col_std(self) -> Matrix:
        """Population standard deviation of each column."""
        mean = self.col_mean()
        centered = self.add_row(-mean)
        var = centered.hadamard(centered).col_mean()
        return Matrix._wrap(1, self.cols, array("d", map(math.sqrt, var._data)))

    def sum_squares(self) -> float:
        return _k().sum_squares(self._data)

    def frobenius_norm(self) -> float:
        return math.sqrt(self.sum_squares())

    def is_finite(self) -> bool:
        return _k().all_finite(self._data)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    return Matrix._wrap(a.rows, b.cols, _k().matmul(a._data, a.rows, a.cols, b._data, b.cols))


def hadamard(a: Matrix, b: Matrix) -> Matrix:
    if a.shape != b.shape:
        raise ShapeError(f"hadamard: shapes {a.shape} and {b.shape} differ")
    return Matrix._wrap(a.rows, a.cols, _k().hadamard(a._data, b._data))


def transpose(a: Matrix) -> Matrix:
    return Matrix._wrap(a.cols, a.rows, _k().transpose(a._data, a.rows, a.cols))


def vstack(top: Matrix, bottom: Matrix) -> Matrix:
    if top.cols != bottom.cols:
        raise ShapeError(f"vstack: column counts {top.cols} and {bottom.cols} differ")
    return Matrix._wrap(top.rows + bottom.rows, top.cols, top._data + bottom._data)


def hstack(columns: Sequence[Matrix]) -> Matrix:
    """Concatenate N x 1 column matrices side by side."""
    if not columns:
        raise ShapeError("hstack of nothing")
    n = columns[0].rows
    for c in columns:
        if c.cols != 1 or c.rows != n:
            raise ShapeError(f"hstack expects N x 1 columns of equal N, got {c.shape}")
    buf = array("d", bytes(8 * n * len(columns)))
    width = len(columns)
    for j, c in enumerate(columns):
        buf[j::width] = c._data
    return Matrix._wrap(n, width, buf)


def elementwise(kernel: str, code: int, a: Matrix) -> Matrix:
    """Apply a named elementwise kernel (``activate`` or ``activate_derivative``)."""
    if kernel not in ("activate", "activate_derivative"):
        raise ValueError(f"unknown elementwise kernel {kernel!r}")
    return Matrix._wrap(a.rows, a.cols, getattr(_k(), kernel)(code, a._data))
