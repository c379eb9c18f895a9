"""Periodic spectral representation of functions on the real line.

The line is truncated to ``[-L, L)`` and sampled at ``n`` equispaced nodes.
Transforms follow the continuous convention

    f_hat(xi) = int exp(-i x xi) f(x) dx,

so that ``d/dx`` corresponds to multiplication by ``i xi``.  Spectral
coefficients are stored in FFT order (``numpy.fft.fftfreq``) and scaled so
that ``coeffs[k]`` approximates ``f_hat(xi[k])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "SpectralGrid",
    "Field",
    "Spectrum",
    "make_grid",
    "forward",
    "inverse",
    "apply_multiplier",
    "lp_norm",
    "tail_mass",
    "plancherel_l2",
]

Symbol = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, complex, float]


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Equispaced periodic grid on ``[-L, L)``.

    Use :func:`make_grid` to construct; it validates ``n`` and ``L``.
    """

    n: int
    L: float
    x: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)
    k: np.ndarray = field(repr=False)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def nyquist(self) -> int:
        """FFT index of the unpaired mode ``xi = -pi n / (2L)``."""
        return self.n // 2

    @property
    def xi_max(self) -> float:
        return np.pi * self.n / (2.0 * self.L)

    def same_as(self, other: "SpectralGrid") -> bool:
        return self is other or (self.n == other.n and self.L == other.L)

    def __eq__(self, other):
        return isinstance(other, SpectralGrid) and self.same_as(other)

    def __hash__(self):
        return hash((self.n, self.L))


def make_grid(n: int, L: float) -> SpectralGrid:
    """Build a grid with ``n`` nodes (a power of two, at least 16) on ``[-L, L)``."""
    n_int = int(n)
    if n_int != n or n_int < 16 or (n_int & (n_int - 1)) != 0:
        raise ValueError(f"n must be a power of two >= 16, got {n!r}")
    L = float(L)
    if not np.isfinite(L) or L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    dx = 2.0 * L / n_int
    x = -L + dx * np.arange(n_int)
    k = np.fft.fftfreq(n_int, d=1.0 / n_int).astype(np.int64)
    xi = (np.pi / L) * k
    for arr in (x, xi, k):
        arr.flags.writeable = False
    return SpectralGrid(n=n_int, L=L, x=x, xi=xi, k=k)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function at the grid nodes."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    def __add__(self, other: "Field") -> "Field":
        _check_same(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same(self.grid, other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, c * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Spectral coefficients ``coeffs[k] ~ f_hat(xi[k])`` in FFT order."""

    grid: SpectralGrid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    def __add__(self, other: "Spectrum") -> "Spectrum":
        _check_same(self.grid, other.grid)
        return Spectrum(self.grid, self.coeffs + other.coeffs)


def _check_same(a: SpectralGrid, b: SpectralGrid) -> None:
    if not a.same_as(b):
        raise ValueError(f"grid mismatch: (n={a.n}, L={a.L}) vs (n={b.n}, L={b.L})")


def _phase(grid: SpectralGrid) -> np.ndarray:
    # exp(i xi_k L) = (-1)^k, from the node offset x_0 = -L
    return np.where(grid.k % 2 == 0, 1.0, -1.0)


def to_coeffs(grid: SpectralGrid, values: np.ndarray) -> np.ndarray:
    """Raw-array version of :func:`forward` (no validation)."""
    return grid.dx * _phase(grid) * np.fft.fft(values)


def to_values(grid: SpectralGrid, coeffs: np.ndarray) -> np.ndarray:
    """Raw-array version of :func:`inverse`; returns the real part."""
    return np.fft.ifft(coeffs * _phase(grid)).real / grid.dx


def forward(f: Field) -> Spectrum:
    return Spectrum(f.grid, to_coeffs(f.grid, f.values))


def inverse(s: Spectrum) -> Field:
    return Field(s.grid, to_values(s.grid, s.coeffs))


def symbol_values(grid: SpectralGrid, symbol: Symbol, real_output: bool = True) -> np.ndarray:
    """Evaluate ``symbol`` on ``grid.xi``.

    With ``real_output`` the imaginary part at the Nyquist mode is dropped;
    for a Hermitian symbol that part is odd in ``xi`` and has no partner.
    """
    if callable(symbol):
        vals = np.asarray(symbol(grid.xi), dtype=complex)
    else:
        vals = np.asarray(symbol, dtype=complex)
    vals = np.broadcast_to(vals, (grid.n,)).copy()
    if not np.all(np.isfinite(vals)):
        bad = grid.xi[~np.isfinite(vals)]
        raise ValueError(f"symbol is not finite at xi = {bad[:5]}")
    if real_output:
        vals[grid.nyquist] = vals[grid.nyquist].real
    return vals


def apply_multiplier(s: Spectrum, symbol: Symbol, real_output: bool = True) -> Spectrum:
    """Multiply coefficients by ``symbol(xi)``."""
    return Spectrum(s.grid, symbol_values(s.grid, symbol, real_output) * s.coeffs)


def lp_norm(f: Field, p: float) -> float:
    """Rectangle-rule ``L^p`` norm; ``p = np.inf`` gives the max norm."""
    return _lp(f.values, f.grid.dx, p)


def _lp(values: np.ndarray, dx: float, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(values)))
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p!r}")
    a = np.abs(values)
    if p == 1:
        return float(np.sum(a) * dx)
    if p == 2:
        return float(np.sqrt(np.dot(a, a) * dx))
    scale = a.max()
    if scale == 0:
        return 0.0
    return float(scale * (np.sum((a / scale) ** p) * dx) ** (1.0 / p))


def plancherel_l2(s: Spectrum) -> float:
    """``L^2`` norm computed on the frequency side, ``(sum |c|^2 dxi / 2 pi)^(1/2)``."""
    c = s.coeffs
    return float(np.sqrt(np.real(np.vdot(c, c)) * s.grid.dxi / (2 * np.pi)))


def tail_mass(f: Field, fraction: float = 0.5) -> float:
    """Share of ``int |f|`` carried by ``|x| > fraction * L``.

    Periodic truncation is trustworthy when this is small (default
    acceptance threshold in callers is ``1e-10``).
    """
    a = np.abs(f.values)
    total = a.sum()
    if total == 0:
        return 0.0
    return float(a[np.abs(f.grid.x) > fraction * f.grid.L].sum() / total)
