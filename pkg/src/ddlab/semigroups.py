"""Linear solution operators applied as single Fourier multipliers.

Three evolutions ``v_hat(t) = exp(-t * symbol(xi)) v_hat(0)`` are supported:

``heat``
    ``symbol = |xi|^m`` (``v_t + M v = 0``).
``bbm``
    ``symbol = (|xi|^m + s i xi |xi|^m) / (1 + |xi|^m)``, the traveling-frame
    linearization ``v_t + M v_t + M v + M v_x = 0``.  Transcribing that
    equation with ``d_x <-> i xi`` gives ``s = +1`` (the default);
    ``s = -1`` is its complex conjugate.  Shifting the linear part of
    ``u_t + M u_t + M u + u_x = 0`` by ``v(x, t) = u(x + t, t)`` (see
    :func:`traveling_frame` with ``direction=-1``) produces ``s = -1``.
``kdv``
    ``symbol = |xi|^m - i xi |xi|^m`` (``u_t + M u - M u_x = 0``).

Evaluation is exact in time: there is no time stepping.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Sequence

import numpy as np

from .grid import Field, SpectralGrid, to_coeffs, to_values

__all__ = [
    "PhaseFunction",
    "Trajectory",
    "apply_semigroup",
    "semigroup_property_check",
    "traveling_frame",
    "nonlinear_factor",
    "semigroup_trajectory",
    "trajectory_norms",
]

_KINDS = ("heat", "bbm", "kdv")


@dataclass(frozen=True)
class PhaseFunction:
    """Generator symbol of a linear evolution ``exp(-t * symbol)``.

    ``dispersion_sign`` only affects ``kind="bbm"``.
    """

    kind: str
    m: float
    dispersion_sign: int = 1

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if not self.m >= 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.dispersion_sign not in (1, -1):
            raise ValueError("dispersion_sign must be +1 or -1")

    def symbol(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        am = np.abs(xi) ** self.m
        if self.kind == "heat":
            return am.astype(complex)
        if self.kind == "kdv":
            return am - 1j * xi * am
        return (am + self.dispersion_sign * 1j * xi * am) / (1.0 + am)

    def on_grid(self, grid: SpectralGrid) -> np.ndarray:
        """Symbol at ``grid.xi`` with the unpaired Nyquist value made real.

        Dropping the odd part of the generator (rather than of the
        propagator) keeps ``exp(-(s+t) P) = exp(-s P) exp(-t P)`` exact.
        """
        vals = self.symbol(grid.xi)
        vals[grid.nyquist] = vals[grid.nyquist].real
        return vals


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Fields sampled at increasing times, with per-sample norms.

    ``norms`` columns are ``(L2, Linf, L2 of d_x)``.  ``aux`` carries
    solver-specific diagnostics keyed by name.
    """

    grid: SpectralGrid
    times: np.ndarray
    values: np.ndarray  # shape (len(times), n)
    norms: np.ndarray = None
    aux: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (times.size, self.grid.n):
            raise ValueError(f"values shape {vals.shape} does not match times/grid")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", vals)
        if self.norms is None:
            object.__setattr__(self, "norms", trajectory_norms(self.grid, vals))

    def __len__(self):
        return self.times.size

    def field(self, i: int) -> Field:
        return Field(self.grid, self.values[i])

    def at(self, t: float) -> Field:
        """Sample whose time matches ``t`` (to 1e-9 relative)."""
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=1e-9, atol=1e-12))
        if idx.size == 0:
            raise KeyError(f"time {t} not sampled")
        return self.field(int(idx[0]))


def trajectory_norms(grid: SpectralGrid, values: np.ndarray) -> np.ndarray:
    values = np.atleast_2d(values)
    dx = grid.dx
    l2 = np.sqrt(np.sum(values**2, axis=1) * dx)
    linf = np.max(np.abs(values), axis=1)
    c = np.fft.fft(values, axis=1)
    c[:, grid.nyquist] = 0.0
    dv = np.fft.ifft(1j * grid.xi * c, axis=1).real
    l2x = np.sqrt(np.sum(dv**2, axis=1) * dx)
    return np.column_stack([l2, linf, l2x])


def apply_semigroup(phase: PhaseFunction, t: float, v0: Field) -> Field:
    """``exp(-t * phase) v0`` on ``v0``'s grid."""
    if not t >= 0:
        raise ValueError(f"t must be non-negative, got {t}")
    grid = v0.grid
    c = to_coeffs(grid, v0.values)
    if t == 0:
        return Field(grid, to_values(grid, c))
    return Field(grid, to_values(grid, np.exp(-t * phase.on_grid(grid)) * c))


def semigroup_property_check(phase: PhaseFunction, s: float, t: float, v0: Field) -> float:
    """``||S(s+t) v0 - S(s) S(t) v0||_2`` (should be round-off sized)."""
    if s < 0 or t < 0:
        raise ValueError("s and t must be non-negative")
    whole = apply_semigroup(phase, s + t, v0)
    split = apply_semigroup(phase, s, apply_semigroup(phase, t, v0))
    d = whole.values - split.values
    return float(np.sqrt(np.dot(d, d) * v0.grid.dx))


def traveling_frame(traj: Trajectory, direction: int = 1) -> Trajectory:
    """Shift each sample by ``direction * t``.

    ``direction=+1`` maps ``u(x, t)`` to ``v(x, t) = u(x - t, t)``; ``-1``
    gives ``v(x, t) = u(x + t, t)`` and undoes ``+1``.  The shift is the
    exact spectral factor ``exp(-i d t xi)``.  Only ``direction=-1`` removes
    the transport term ``u_x`` from ``u_t + M u_t + M u + u_x = 0``.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    grid = traj.grid
    out = np.empty_like(traj.values)
    for i, t in enumerate(traj.times):
        sym = np.exp(-1j * direction * t * grid.xi)
        sym[grid.nyquist] = sym[grid.nyquist].real
        out[i] = to_values(grid, sym * to_coeffs(grid, traj.values[i]))
    return replace(traj, values=out, norms=None)


def nonlinear_factor(m: float, xi: np.ndarray) -> np.ndarray:
    """Symbol of ``K_m * d_x``, i.e. ``i xi / (1 + |xi|^m)``."""
    return 1j * xi / (1.0 + np.abs(xi) ** m)


def semigroup_trajectory(phase: PhaseFunction, times: Sequence[float], v0: Field) -> Trajectory:
    grid = v0.grid
    c = to_coeffs(grid, v0.values)
    sym = phase.on_grid(grid)
    vals = np.array([to_values(grid, np.exp(-t * sym) * c) for t in times])
    return Trajectory(grid, np.asarray(times, dtype=float), vals)
