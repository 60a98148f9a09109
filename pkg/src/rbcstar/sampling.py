"""Seeded random objects.

All randomness goes through ``numpy.random.default_rng(seed)`` (the PCG64
bit generator).  A standard complex Gaussian entry is (x + i y) / sqrt(2)
with x, y independent standard normals drawn in that order, real parts of
the whole array first, then imaginary parts.
"""

from __future__ import annotations

import numpy as np

from .core import Projection, adjoint


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, *shape) -> np.ndarray:
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def random_matrix(rng, n: int, m: int | None = None) -> np.ndarray:
    return complex_gaussian(rng, n, n if m is None else m)


def random_unitary(rng, n: int) -> np.ndarray:
    """Haar unitary via QR of a complex Gaussian matrix with phase correction."""
    q, r = np.linalg.qr(random_matrix(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_projection(rng, n: int, rank: int) -> Projection:
    u = random_unitary(rng, n)[:, :rank]
    return Projection.from_matrix(u @ adjoint(u))


def random_rank(rng, n: int, low: int = 1, high: int | None = None) -> int:
    high = n - 1 if high is None else high
    return int(rng.integers(low, high + 1))
