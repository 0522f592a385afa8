"""Path loss measurements: CSV I/O, splitting, feature scaling and a synthetic generator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .numeric import Matrix, Rng, hstack

CSV_HEADER = ("distance_m", "frequency_mhz", "path_loss_db", "area")
FEATURE_NAMES = ("log10_distance_m", "log10_frequency_mhz")


class DataError(ValueError):
    """Malformed or unusable measurement data."""


@dataclass(frozen=True)
class Sample:
    distance: float  # m
    frequency: float  # MHz
    path_loss: float  # dB
    area: str = ""

    def __post_init__(self):
        if not (self.distance > 0 and math.isfinite(self.distance)):
            raise DataError(f"distance must be a finite value > 0, got {self.distance}")
        if not (self.frequency > 0 and math.isfinite(self.frequency)):
            raise DataError(f"frequency must be a finite value > 0, got {self.frequency}")
        if not math.isfinite(self.path_loss):
            raise DataError(f"path loss must be finite, got {self.path_loss}")


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def require_nonempty(self) -> None:
        if not self.samples:
            raise DataError(f"dataset is empty ({self.provenance or 'no provenance'})")

    def targets(self) -> Matrix:
        return Matrix.column(s.path_loss for s in self.samples)

    def areas(self) -> list[str]:
        return sorted({s.area for s in self.samples})

    def frequencies(self) -> list[float]:
        return sorted({s.frequency for s in self.samples})

    def where(self, predicate, note: str = "") -> Dataset:
        return Dataset(
            tuple(s for s in self.samples if predicate(s)),
            f"{self.provenance}{note}",
        )


@dataclass(frozen=True)
class SplitDataset:
    learn: Dataset
    validation: Dataset
    test: Dataset
    seed: int

    def all(self) -> Dataset:
        return Dataset(
            self.learn.samples + self.validation.samples + self.test.samples,
            self.learn.provenance.rsplit("[", 1)[0],
        )


# CSV


def load_csv(path) -> Dataset:
    """Read ``distance_m,frequency_mhz,path_loss_db,area`` rows, keeping file order.

    Raises FileNotFoundError for a missing file and DataError (naming the
    1-based data row) for anything malformed.
    """
    path = Path(path)
    samples = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"{path}: expected header {','.join(CSV_HEADER)}, got {header}")
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DataError(f"{path}: row {row_no}: expected 4 fields, got {len(row)}")
            try:
                d, f, pl = (float(c) for c in row[:3])
            except ValueError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from None
            try:
                samples.append(Sample(d, f, pl, row[3].strip()))
            except DataError as exc:
                raise DataError(f"{path}: row {row_no}: {exc}") from None
    return Dataset(tuple(samples), str(path))


def write_csv(ds: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in ds.samples:
            w.writerow([repr(s.distance), repr(s.frequency), repr(s.path_loss), s.area])


# splitting


def split_sizes(n: int) -> tuple[int, int, int]:
    learn = (8 * n) // 10
    validation = n // 10
    return learn, validation, n - learn - validation


def split(ds: Dataset, seed: int) -> SplitDataset:
    """Seeded uniform 80/10/10 partition into learn, validation and test."""
    n = len(ds)
    if n < 10:
        raise DataError(f"need at least 10 samples to split, got {n}")
    order = Rng(seed).permutation(n)
    n_learn, n_val, _ = split_sizes(n)
    pick = lambda idx, tag: Dataset(tuple(ds.samples[i] for i in idx), f"{ds.provenance}[{tag}]")
    return SplitDataset(
        learn=pick(order[:n_learn], "learn"),
        validation=pick(order[n_learn:n_learn + n_val], "validation"),
        test=pick(order[n_learn + n_val:], "test"),
        seed=seed,
    )


# features


def log_features(ds: Dataset) -> Matrix:
    """N x 2 matrix of (log10 distance, log10 frequency)."""
    return hstack([
        Matrix.column(math.log10(s.distance) for s in ds.samples),
        Matrix.column(math.log10(s.frequency) for s in ds.samples),
    ])


@dataclass(frozen=True)
class FeatureTransform:
    """Standardization of log10 features, fitted on the learn split only."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self):
        for name, s in zip(FEATURE_NAMES, self.std):
            if not s > 0:
                raise DataError(f"feature {name} has zero variance")

    def standardize(self, logm: Matrix) -> Matrix:
        mean = Matrix.row(self.mean)
        inv = Matrix.row(1.0 / s for s in self.std)
        return logm.add_row(-mean).hadamard(_tile(inv, logm.rows))

    def unstandardize(self, z: Matrix) -> Matrix:
        std = Matrix.row(self.std)
        return z.hadamard(_tile(std, z.rows)).add_row(Matrix.row(self.mean))

    def apply(self, ds: Dataset) -> Matrix:
        return self.standardize(log_features(ds))

    def point(self, distance: float, frequency: float) -> Matrix:
        if not (distance > 0 and frequency > 0):
            raise DataError(f"distance and frequency must be > 0, got {distance}, {frequency}")
        return self.standardize(Matrix.row([math.log10(distance), math.log10(frequency)]))

    def to_dict(self) -> dict:
        return {"features": list(FEATURE_NAMES), "mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> FeatureTransform:
        return cls(tuple(float(v) for v in d["mean"]), tuple(float(v) for v in d["std"]))


def _tile(row: Matrix, n: int) -> Matrix:
    return Matrix(n, row.cols, list(row.data) * n)


def fit_transform(learn: Dataset) -> FeatureTransform:
    if len(learn) < 2:
        raise DataError(f"need at least 2 samples to fit feature scaling, got {len(learn)}")
    logm = log_features(learn)
    mean = logm.col_mean()
    std = logm.col_std()
    for name, m, s in zip(FEATURE_NAMES, mean.data, std.data):
        # a constant column can leave a std of a few ulps after rounding in the mean
        if not s > 1e-12 * max(1.0, abs(m)):
            raise DataError(f"feature {name} has zero variance in the learn split")
    return FeatureTransform(tuple(mean.data), tuple(std.data))


def apply_transform(t: FeatureTransform, ds: Dataset) -> Matrix:
    return t.apply(ds)


# synthetic generator


@dataclass(frozen=True)
class GeneratorConfig:
    """Dual-slope log-distance path loss with lognormal shadowing.

    Below ``breakpoint`` the loss grows ``slope_near`` dB per decade of
    distance, above it ``slope_far``; the two pieces meet at the breakpoint.
    """

    intercept: float = -60.0
    slope_near: float = 35.0
    slope_far: float = 35.0
    breakpoint: float = 200.0
    freq_slope: float = 20.0
    noise_sigma: float = 7.0
    distance_min: float = 30.0
    distance_max: float = 1500.0
    frequencies: tuple[float, ...] = (3400.0, 5300.0, 6400.0)
    samples_per_frequency: int = 2000
    seed: int = 0
    area: str = ""

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if not 0 < self.distance_min < self.distance_max:
            raise ValueError(
                f"need 0 < distance_min < distance_max, got {self.distance_min}, {self.distance_max}"
            )
        if not self.distance_min <= self.breakpoint <= self.distance_max:
            raise ValueError(f"breakpoint {self.breakpoint} m lies outside the distance range")
        if not self.noise_sigma >= 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.frequencies or any(not f > 0 for f in self.frequencies):
            raise ValueError("frequencies must be a non-empty list of positive values")
        if self.samples_per_frequency < 1:
            raise ValueError("samples_per_frequency must be >= 1")
        for name in ("intercept", "slope_near", "slope_far", "freq_slope"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def mean_path_loss(self, distance: float, frequency: float) -> float:
        ld = math.log10(distance)
        lb = math.log10(self.breakpoint)
        if distance < self.breakpoint:
            dist_term = self.slope_near * ld
        else:
            dist_term = self.slope_near * lb + self.slope_far * (ld - lb)
        return self.intercept + dist_term + self.freq_slope * math.log10(frequency)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["frequencies"] = list(self.frequencies)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> GeneratorConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown generator settings: {sorted(unknown)}")
        return cls(**d)


PRESETS = {
    "area-a-analog": GeneratorConfig(
        intercept=-60.0, slope_near=35.0, slope_far=35.0, breakpoint=200.0,
        noise_sigma=7.0, area="A",
    ),
    "area-b-analog": GeneratorConfig(
        intercept=-95.0, slope_near=60.0, slope_far=20.0, breakpoint=200.0,
        noise_sigma=7.0, area="B",
    ),
}


def preset(name: str, **overrides) -> GeneratorConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    d = base.to_dict()
    d.update(overrides)
    return GeneratorConfig.from_dict(d)


def generate(config: GeneratorConfig) -> Dataset:
    """Draw log-uniform distances per frequency and add Gaussian shadowing (dB)."""
    rng = Rng(config.seed)
    lo, hi = math.log10(config.distance_min), math.log10(config.distance_max)
    samples = []
    for f in config.frequencies:
        for _ in range(config.samples_per_frequency):
            d = 10.0 ** rng.uniform(lo, hi)
            d = min(max(d, config.distance_min), config.distance_max)
            pl = config.mean_path_loss(d, f)
            if config.noise_sigma > 0:
                pl += rng.gauss(0.0, config.noise_sigma)
            samples.append(Sample(d, f, pl, config.area))
    note = "generator:" + json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return Dataset(tuple(samples), note)
