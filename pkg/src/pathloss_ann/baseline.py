"""Log-distance baseline: ``PL = a + b log10(d) + c log10(f)`` fitted by least squares."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .data import Dataset, DataError


class DegenerateDesignError(DataError):
    """The design matrix is rank deficient."""


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    distance_coeff: float
    frequency_coeff: float
    # per-frequency variant: one intercept per frequency (MHz), shared distance slope
    frequency_intercepts: Optional[tuple[tuple[float, float], ...]] = None

    def __post_init__(self):
        values = [self.intercept, self.distance_coeff, self.frequency_coeff]
        if self.frequency_intercepts:
            values += [v for _, v in self.frequency_intercepts]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("linear model coefficients must be finite")

    def predict(self, distance: float, frequency: float) -> float:
        return predict_linear(self, distance, frequency)

    def predict_dataset(self, ds: Dataset) -> list[float]:
        return [predict_linear(self, s.distance, s.frequency) for s in ds.samples]

    def to_dict(self) -> dict:
        d = {
            "intercept": self.intercept,
            "distance_coeff": self.distance_coeff,
            "frequency_coeff": self.frequency_coeff,
        }
        if self.frequency_intercepts is not None:
            d["frequency_intercepts"] = [[f, a] for f, a in self.frequency_intercepts]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> LinearModel:
        fi = d.get("frequency_intercepts")
        return cls(
            float(d["intercept"]),
            float(d["distance_coeff"]),
            float(d["frequency_coeff"]),
            None if fi is None else tuple((float(f), float(a)) for f, a in fi),
        )


def predict_linear(m: LinearModel, distance: float, frequency: float) -> float:
    if not (distance > 0 and frequency > 0):
        raise ValueError(f"distance and frequency must be > 0, got {distance}, {frequency}")
    if m.frequency_intercepts is not None:
        for f, a in m.frequency_intercepts:
            if f == frequency:
                return a + m.distance_coeff * math.log10(distance)
        raise ValueError(f"per-frequency model has no intercept for {frequency} MHz")
    return m.intercept + m.distance_coeff * math.log10(distance) + m.frequency_coeff * math.log10(frequency)


def solve(a: list[list[float]], b: list[float], tol: float = 1e-12) -> list[float]:
    """Solve the square system ``a x = b`` by Gaussian elimination with partial pivoting.

    Raises DegenerateDesignError when a pivot falls below ``tol`` times the
    largest absolute entry of ``a``.
    """
    n = len(a)
    m = [list(map(float, row)) + [float(rhs)] for row, rhs in zip(a, b)]
    scale = max((abs(v) for row in a for v in row), default=0.0)
    if scale == 0.0:
        raise DegenerateDesignError("normal equations are all zero")
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        if abs(m[piv][col]) <= tol * scale:
            raise DegenerateDesignError(f"design matrix is rank deficient (column {col})")
        m[col], m[piv] = m[piv], m[col]
        p = m[col]
        for r in range(col + 1, n):
            factor = m[r][col] / p[col]
            if factor:
                row = m[r]
                for c in range(col, n + 1):
                    row[c] -= factor * p[c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        s = m[r][n] - sum(m[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / m[r][r]
    return x


def _normal_equations(columns: list[list[float]], y: list[float]):
    k = len(columns)
    gram = [[math.fsum(u * v for u, v in zip(columns[i], columns[j])) for j in range(k)] for i in range(k)]
    rhs = [math.fsum(u * v for u, v in zip(columns[i], y)) for i in range(k)]
    return gram, rhs


def fit_ols(ds: Dataset, variant: str = "joint", drop_degenerate: bool = False) -> LinearModel:
    """Least-squares fit of the log-distance model.

    ``variant="joint"`` fits ``a + b log10 d + c log10 f``;
    ``variant="per-frequency"`` fits one intercept per frequency with a
    shared distance slope. With ``drop_degenerate`` a joint fit on a single
    frequency drops the frequency term instead of raising.
    """
    if variant not in ("joint", "per-frequency"):
        raise ValueError(f"unknown baseline variant {variant!r}")
    n = len(ds)
    if n < 3:
        raise DataError(f"need at least 3 samples for the baseline fit, got {n}")
    ld = [math.log10(s.distance) for s in ds.samples]
    y = [s.path_loss for s in ds.samples]
    # centred regressors keep the normal equations well conditioned
    ld_mean = math.fsum(ld) / n
    ldc = [v - ld_mean for v in ld]

    if variant == "per-frequency":
        freqs = ds.frequencies()
        indicators = [[1.0 if s.frequency == f else 0.0 for s in ds.samples] for f in freqs]
        gram, rhs = _normal_equations(indicators + [ldc], y)
        coef = solve(gram, rhs)
        slope = coef[-1]
        pairs = tuple((f, a - slope * ld_mean) for f, a in zip(freqs, coef[:-1]))
        return LinearModel(pairs[0][1], slope, 0.0, pairs)

    lf = [math.log10(s.frequency) for s in ds.samples]
    lf_mean = math.fsum(lf) / n
    lfc = [v - lf_mean for v in lf]
    ones = [1.0] * n
    if len(set(lf)) < 2:
        if not drop_degenerate:
            raise DegenerateDesignError(
                "all samples share one frequency; the frequency coefficient is not identifiable"
            )
        gram, rhs = _normal_equations([ones, ldc], y)
        a0, b = solve(gram, rhs)
        return LinearModel(a0 - b * ld_mean, b, 0.0)
    gram, rhs = _normal_equations([ones, ldc, lfc], y)
    a0, b, c = solve(gram, rhs)
    return LinearModel(a0 - b * ld_mean - c * lf_mean, b, c)
