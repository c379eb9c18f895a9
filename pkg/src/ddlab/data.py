"""Initial-data families with closed-form moments."""
from __future__ import annotations

import math

import numpy as np
from scipy import special

from .grid import Field, SpectralGrid, _lp, to_coeffs, to_values
from .kernels import bessel_kernel

__all__ = [
    "gaussian",
    "skew_gaussian",
    "w21_norm",
    "scale_to_smallness",
    "gaussian_raw_moment",
]


def gaussian(grid: SpectralGrid, center: float = 0.0, width: float = 1.0, mass: float = 1.0) -> Field:
    """``mass`` times the normal density with mean ``center`` and std ``width``."""
    z = (grid.x - center) / width
    return Field(grid, mass * np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * width))


def skew_gaussian(grid: SpectralGrid, center: float = 0.0, width: float = 1.0,
                  skew: float = 2.0, mass: float = 1.0) -> Field:
    """Skew-normal density ``2 phi(z) Phi(skew z) / width`` scaled by ``mass``."""
    z = (grid.x - center) / width
    pdf = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
    return Field(grid, mass * 2.0 * pdf * special.ndtr(skew * z) / width)


def gaussian_raw_moment(k: int, center: float, width: float) -> float:
    """``E[X^k]`` for ``X ~ N(center, width^2)``."""
    total = 0.0
    for i in range(0, k + 1, 2):
        # E[Z^i] = (i-1)!! for even i
        dfact = 1.0
        for f in range(i - 1, 0, -2):
            dfact *= f
        total += math.comb(k, i) * center ** (k - i) * width**i * dfact
    return total


def w21_norm(f: Field) -> float:
    """Discrete proxy ``||f||_1 + ||f'||_1 + ||f''||_1`` (spectral derivatives)."""
    grid = f.grid
    c = to_coeffs(grid, f.values)
    c[grid.nyquist] = 0.0
    d1 = to_values(grid, 1j * grid.xi * c)
    d2 = to_values(grid, -(grid.xi**2) * c)
    return _lp(f.values, grid.dx, 1) + _lp(d1, grid.dx, 1) + _lp(d2, grid.dx, 1)


def scale_to_smallness(f: Field, smallness: float) -> Field:
    """Rescale ``f`` so that :func:`w21_norm` equals ``smallness``."""
    norm = w21_norm(f)
    if norm == 0:
        return f
    return Field(f.grid, f.values * (smallness / norm))


def kernel_data(grid: SpectralGrid, m: float) -> Field:
    return bessel_kernel(m, 1, grid)
