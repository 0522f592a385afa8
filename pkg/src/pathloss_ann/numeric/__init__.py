"""Dense float64 linear algebra and seeded randomness.

Hot loops run in the compiled ``_ckernels`` extension when it is built and in
``_pykernels`` otherwise; see :mod:`._backend`.
"""

from . import _backend, vector
from ._backend import available as available_backends, set_backend, use_backend
from .matrix import (
    Matrix,
    ShapeError,
    elementwise,
    hadamard,
    hstack,
    matmul,
    transpose,
    vstack,
)
from .rng import Rng, derive_seed, splitmix64, uniform


def backend_name() -> str:
    return _backend.name


__all__ = [
    "Matrix",
    "Rng",
    "ShapeError",
    "available_backends",
    "backend_name",
    "derive_seed",
    "elementwise",
    "hadamard",
    "hstack",
    "matmul",
    "set_backend",
    "splitmix64",
    "transpose",
    "uniform",
    "use_backend",
    "vector",
    "vstack",
]
