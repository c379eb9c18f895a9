"""Small-data solutions of the traveling-frame nonlinear equation.

In Fourier variables the equation reads

    v_hat_t = -Phi(xi) v_hat - c * i xi / (1 + |xi|^m) * (v^q)_hat,

with ``Phi`` the ``bbm`` phase of :mod:`ddlab.semigroups` and ``c`` the
nonlinear coefficient (1 for the model, 0 to switch the nonlinearity off).
Two solvers are provided:

* :func:`picard_solve` iterates the Duhamel map on a fixed uniform time grid;
* :func:`direct_solve` marches with an integrating-factor Runge-Kutta scheme.

Products are formed pointwise and dealiased by zeroing the top third of
the spectrum.  :func:`second_term_profile` evaluates the correction that
follows ``M G_m(t)`` in the large-time behaviour, for each range of ``q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .analysis import RateFit, fit_power_law
from .grid import Field, SpectralGrid, make_grid, to_coeffs, to_values
from .kernels import KernelSpec, derivative_kernel, heat_kernel
from .semigroups import PhaseFunction, Trajectory, nonlinear_factor, trajectory_norms

__all__ = [
    "NonlinearProblem",
    "WeightedNorm",
    "PicardDivergence",
    "BlowUpError",
    "nonlinearity",
    "dealias_mask",
    "picard_solve",
    "direct_solve",
    "classify_case",
    "critical_constant",
    "supercritical_coefficient",
    "SupercriticalCoefficient",
    "second_term_profile",
    "decay_check",
    "DecayFits",
    "subcritical_profile",
]

VARIANTS = ("abs_power", "signed_power")
CASES = ("subcritical", "critical", "supercritical")


class PicardDivergence(RuntimeError):
    """The fixed-point iteration failed to converge; carries the ratio history."""

    def __init__(self, message: str, increments: Sequence[float], ratios: Sequence[float]):
        super().__init__(message)
        self.increments = list(increments)
        self.ratios = list(ratios)


class BlowUpError(RuntimeError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, time: float):
        super().__init__(f"non-finite solution at t = {time:g}")
        self.time = time


def _power(values: np.ndarray, q: float, variant: str) -> np.ndarray:
    a = np.abs(values)
    if variant == "abs_power":
        return a**q
    if variant == "signed_power":
        return a ** (q - 1.0) * values
    raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def nonlinearity(v: Field, q: float, variant: str) -> Field:
    """Pointwise ``|v|^q`` (``abs_power``) or ``|v|^(q-1) v`` (``signed_power``)."""
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    return Field(v.grid, _power(v.values, q, variant))


def dealias_mask(grid: SpectralGrid) -> np.ndarray:
    """Boolean mask keeping ``|k| <= n // 3`` (two-thirds rule)."""
    return np.abs(grid.k) <= grid.n // 3


@dataclass(frozen=True, eq=False)
class NonlinearProblem:
    """Parameters and data for one nonlinear run.

    ``sample_times`` defaults to every 0.5 time units from 0 to
    ``T_final``; all sample times must lie on the ``dt`` grid.
    """

    m: float
    q: float
    variant: str
    v0: Field
    T_final: float
    dt: float = 0.01
    sample_times: Optional[Tuple[float, ...]] = None
    coefficient: float = 1.0
    dispersion_sign: int = 1

    def __post_init__(self):
        if not self.m > 2:
            raise ValueError(f"m must exceed 2, got {self.m}")
        if not self.q > self.m:
            raise ValueError(f"q must exceed m, got q={self.q}, m={self.m}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.variant == "abs_power" and not float(self.q).is_integer():
            raise ValueError("non-integer q requires variant='signed_power'")
        if not (self.T_final > 0 and self.dt > 0):
            raise ValueError("T_final and dt must be positive")
        steps = self.T_final / self.dt
        if abs(steps - round(steps)) > 1e-9 * steps:
            raise ValueError("T_final must be a multiple of dt")
        if self.sample_times is None:
            k = max(1, int(round(self.T_final / 0.5)))
            times = np.linspace(0.0, self.T_final, k + 1)
        else:
            times = np.asarray(self.sample_times, dtype=float)
        if times.size == 0 or times[0] != 0.0 or np.any(np.diff(times) <= 0) or times[-1] > self.T_final * (1 + 1e-12):
            raise ValueError("sample_times must start at 0, increase, and end by T_final")
        object.__setattr__(self, "sample_times", tuple(float(t) for t in times))

    @property
    def n_steps(self) -> int:
        return int(round(self.T_final / self.dt))

    @property
    def phase(self) -> PhaseFunction:
        return PhaseFunction("bbm", self.m, self.dispersion_sign)

    @property
    def mass(self) -> float:
        return self.v0.integral()

    def sample_indices(self, h: float) -> np.ndarray:
        idx = np.array([t / h for t in self.sample_times])
        r = np.round(idx)
        if np.any(np.abs(idx - r) > 1e-8 * np.maximum(1.0, r)):
            raise ValueError("sample times must be multiples of the time step")
        return r.astype(int)


@dataclass(frozen=True)
class WeightedNorm:
    """``sup_t (1+t)^(1/2m)|v|_2 + (1+t)^(1/m)|v|_inf + (1+t)^(3/2m)|v_x|_2``."""

    value: float

    @classmethod
    def from_norms(cls, times: np.ndarray, norms: np.ndarray, m: float) -> "WeightedNorm":
        w = 1.0 + np.asarray(times)
        total = (w ** (0.5 / m) * norms[:, 0] + w ** (1.0 / m) * norms[:, 1]
                 + w ** (1.5 / m) * norms[:, 2])
        val = float(total.max()) if total.size else 0.0
        if not np.isfinite(val):
            raise ValueError("weighted norm is not finite")
        return cls(val)

    @classmethod
    def from_trajectory(cls, traj: Trajectory, m: float) -> "WeightedNorm":
        return cls.from_norms(traj.times, traj.norms, m)


class _Model:
    """Spectral pieces shared by both solvers."""

    def __init__(self, prob: NonlinearProblem):
        grid = prob.v0.grid
        self.grid = grid
        self.q = prob.q
        self.variant = prob.variant
        self.phi = prob.phase.on_grid(grid)
        fac = nonlinear_factor(prob.m, grid.xi).astype(complex)
        fac[grid.nyquist] = 0.0
        self.factor = -prob.coefficient * fac * dealias_mask(grid)

    def rhs(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectral nonlinear term for one state (or a stack of states)."""
        v = np.fft.ifft(coeffs * _sign(self.grid), axis=-1).real / self.grid.dx
        return self.factor * to_coeffs(self.grid, _power(v, self.q, self.variant))

    def rhs_values(self, values: np.ndarray) -> np.ndarray:
        return self.factor * to_coeffs(self.grid, _power(values, self.q, self.variant))


def _sign(grid: SpectralGrid) -> np.ndarray:
    return np.where(grid.k % 2 == 0, 1.0, -1.0)


def _linear_stack(model: _Model, c0: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.exp(-np.outer(times, model.phi)) * c0


def picard_solve(prob: NonlinearProblem, n_steps: Optional[int] = None, max_iter: int = 50,
                 tol: float = 1e-12) -> Trajectory:
    """Fixed-point iteration of the Duhamel map from the linear solution.

    The time integral uses the composite trapezoid rule on the uniform grid
    ``tau_k = k h`` with ``h = T_final / n_steps`` (default ``h = dt``),
    accumulated recursively as

        I_{k+1} = E I_k + h/2 (E F_k + F_{k+1}),   E = exp(-h Phi).

    Iteration stops once the largest ``L^2`` change over the time grid is at
    most ``tol``.  ``aux`` records ``increments``, ``contraction_ratios``
    (quotients of successive weighted-norm increments) and
    ``weighted_norms`` of every iterate.

    Raises
    ------
    PicardDivergence
        If ``max_iter`` iterations do not reach ``tol`` or an iterate stops
        being finite.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n_steps = prob.n_steps if n_steps is None else int(n_steps)
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    h = prob.T_final / n_steps
    grid = prob.v0.grid
    model = _Model(prob)
    taus = h * np.arange(n_steps + 1)
    c0 = to_coeffs(grid, prob.v0.values)
    lin = _linear_stack(model, c0, taus)
    E = np.exp(-h * model.phi)
    sign = _sign(grid)

    def values_of(coeffs):
        return np.fft.ifft(coeffs * sign, axis=-1).real / grid.dx

    lin_vals = values_of(lin)
    current = lin_vals
    increments, ratios, wnorms = [], [], []
    wnorms.append(WeightedNorm.from_norms(taus, trajectory_norms(grid, current), prob.m).value)
    prev_w = None
    converged = False
    for _ in range(max_iter):
        with np.errstate(over="ignore", invalid="ignore"):
            F = model.rhs_values(current)
        duhamel = np.empty_like(F)
        duhamel[0] = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(n_steps):
                duhamel[k + 1] = E * duhamel[k] + 0.5 * h * (E * F[k] + F[k + 1])
            new = lin_vals + values_of(duhamel)
        diff = new - current
        if not np.all(np.isfinite(new)):
            raise PicardDivergence("iterate is not finite", increments, ratios)
        with np.errstate(over="ignore", invalid="ignore"):
            inc = float(np.sqrt(np.max(np.sum(diff**2, axis=1)) * grid.dx))
            diff_norms = trajectory_norms(grid, diff)
        if not (math.isfinite(inc) and np.all(np.isfinite(diff_norms))):
            raise PicardDivergence("increment is not finite", increments, ratios)
        w = WeightedNorm.from_norms(taus, diff_norms, prob.m).value
        increments.append(inc)
        if prev_w is not None and prev_w > 0:
            ratios.append(w / prev_w)
        prev_w = w
        current = new
        with np.errstate(over="ignore", invalid="ignore"):
            cur_norms = trajectory_norms(grid, current)
        if not np.all(np.isfinite(cur_norms)):
            raise PicardDivergence("iterate norm is not finite", increments, ratios)
        wnorms.append(WeightedNorm.from_norms(taus, cur_norms, prob.m).value)
        if inc <= tol:
            converged = True
            break
    if not converged:
        raise PicardDivergence(
            f"no convergence in {max_iter} iterations (last increment {increments[-1]:.3e})",
            increments, ratios)
    idx = prob.sample_indices(h)
    aux = {"increments": np.array(increments), "contraction_ratios": np.array(ratios),
           "weighted_norms": np.array(wnorms), "iterations": len(increments),
           "grid_times": taus, "grid_norms": trajectory_norms(grid, current)}
    return Trajectory(grid, taus[idx], current[idx], aux=aux)


def direct_solve(prob: NonlinearProblem) -> Trajectory:
    """Integrating-factor RK4 in time with the exact linear propagator.

    Step-size contract: ``dt <= 0.5 / max|i xi / (1 + |xi|^m)|``.  The space
    integral of ``v^q`` after every step is stored in
    ``aux["power_integral"]`` as ``(times, values)``.

    Raises
    ------
    BlowUpError
        If the state stops being finite.
    """
    grid = prob.v0.grid
    model = _Model(prob)
    dt = prob.dt
    fmax = float(np.max(np.abs(model.factor)))
    if fmax > 0 and dt > 0.5 / fmax:
        raise ValueError(f"dt = {dt} violates dt <= 0.5 / {fmax:.4g}")
    idx = prob.sample_indices(dt)
    E = np.exp(-0.5 * dt * model.phi)
    E2 = E * E
    c = to_coeffs(grid, prob.v0.values)
    out = np.empty((idx.size, grid.n))
    nsteps = prob.n_steps
    pint = np.empty(nsteps + 1)
    dx = grid.dx
    want = dict()
    for i, k in enumerate(idx):
        want.setdefault(int(k), []).append(i)

    def record(step, coeffs):
        vals = to_values(grid, coeffs)
        pint[step] = float(np.sum(_power(vals, prob.q, prob.variant)) * dx)
        for i in want.get(step, ()):
            out[i] = vals

    record(0, c)
    for step in range(1, nsteps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = model.rhs(c)
            k2 = model.rhs(E * (c + 0.5 * dt * k1))
            k3 = model.rhs(E * c + 0.5 * dt * k2)
            k4 = model.rhs(E2 * c + dt * E * k3)
            c = E2 * c + (dt / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
        if not np.all(np.isfinite(c)):
            raise BlowUpError(step * dt)
        record(step, c)
    aux = {"power_integral": (dt * np.arange(nsteps + 1), pint)}
    return Trajectory(grid, np.array(prob.sample_times), out, aux=aux)


def classify_case(m: float, q: float, atol: float = 1e-12) -> str:
    """``subcritical`` for ``q < m + 1``, ``critical`` at equality, else ``supercritical``."""
    if abs(q - (m + 1)) <= atol:
        return "critical"
    return "subcritical" if q < m + 1 else "supercritical"


def _reference_profile(m: float, n: int = 4096, L: float = 64.0) -> Field:
    return heat_kernel(m, 1.0, make_grid(n, L))


def critical_constant(m: float, mass: float, variant: str = "signed_power",
                      q: Optional[float] = None) -> float:
    """``int (mass * G_m(x, 1))^q dx`` with ``q = m + 1`` unless given."""
    q = m + 1 if q is None else q
    g = _reference_profile(m)
    return float(np.sum(_power(mass * g.values, q, variant)) * g.grid.dx)


@dataclass(frozen=True)
class SupercriticalCoefficient:
    """``int_0^inf int v^q dy dtau`` split into quadrature and fitted tail."""

    value: float
    quadrature: float
    tail: float
    tail_exponent: float
    T: float

    @property
    def tail_bound(self) -> float:
        return abs(self.tail)


def supercritical_coefficient(traj: Trajectory, q: float, variant: str) -> SupercriticalCoefficient:
    """Space-time integral of ``v^q`` with a power-law tail beyond the last time.

    Uses ``aux["power_integral"]`` when present (per-step series from
    :func:`direct_solve`), else the trajectory samples.  The tail fits
    ``|int v^q dy| ~ C tau^-g`` on the last quarter of the run and adds
    ``C T^(1-g) / (g - 1)``.
    """
    if "power_integral" in traj.aux:
        times, vals = traj.aux["power_integral"]
    else:
        times = traj.times
        vals = np.sum(_power(traj.values, q, variant), axis=1) * traj.grid.dx
    times = np.asarray(times)
    vals = np.asarray(vals)
    quad = float(np.trapezoid(vals, times))
    T = float(times[-1])
    fit = fit_power_law(times, np.abs(vals), window=(T / 4, T))
    g = -fit.exponent
    if not g > 1:
        raise ValueError(f"space integral of v^q decays too slowly (exponent {-g:.3f})")
    tail = math.copysign(fit.prefactor * T ** (1 - g) / (g - 1), vals[-1])
    return SupercriticalCoefficient(quad + tail, quad, tail, fit.exponent, T)


def _subcritical_hat(m: float, q: float, variant: str, mass: float, t: float,
                     xi: np.ndarray, n_tau: int) -> np.ndarray:
    # FT[(M G_m(tau))^q](xi) = |M|^q-type factor * tau^-g * gq_hat(xi tau^(1/m)),
    # g = (q-1)/m; tau = t u^beta with beta = 1/(1-g) removes the tau^-g singularity.
    ref = _reference_profile(m)
    rg = ref.grid
    gq = to_coeffs(rg, _power(ref.values, q, variant)).real
    order = np.argsort(rg.xi)
    spline = CubicSpline(rg.xi[order], gq[order])
    eta_max = rg.xi_max * (1 - 1e-12)
    g = (q - 1.0) / m
    beta = 1.0 / (1.0 - g)
    s = np.linspace(0.0, 1.0, n_tau + 1)
    u = 0.5 * (1.0 - np.cos(np.pi * s))
    dudsw = 0.5 * np.pi * np.sin(np.pi * s)
    w = np.full(s.size, 1.0 / n_tau)
    w[[0, -1]] *= 0.5
    am = np.abs(xi) ** m
    acc = np.zeros(xi.size)
    for ui, wi, di in zip(u, w, dudsw):
        if di == 0.0:
            continue
        eta = xi * t ** (1.0 / m) * ui ** (beta / m)
        inside = np.abs(eta) <= eta_max
        ghat = np.zeros(xi.size)
        ghat[inside] = spline(eta[inside])
        acc += wi * di * np.exp(-t * (1.0 - ui**beta) * am) * ghat
    mq = float(_power(np.array([mass]), q, variant)[0])
    return mq * 1j * xi * t ** (1.0 - g) * beta * acc


def second_term_profile(prob: NonlinearProblem, case: str, t: float,
                        trajectory: Optional[Trajectory] = None,
                        grid: Optional[SpectralGrid] = None, n_tau: int = 512) -> Field:
    """Correction ``P`` with ``v(t) ~ S(t) v0 - P(t)`` beyond first order.

    * ``subcritical`` (``m < q < m + 1``):
      ``int_0^t d_x G_m(t - tau) * (M G_m(tau))^q dtau``;
    * ``critical`` (``q = m + 1``):
      ``log(t) * int (M G_m(x, 1))^(m+1) dx * d_x G_m(t)``;
    * ``supercritical`` (``q > m + 1``): ``(int_0^inf int v^q) * d_x G_m(t)``,
      which needs ``trajectory`` (see :func:`supercritical_coefficient`).

    ``M`` is the mass of ``prob.v0`` and powers follow ``prob.variant``.
    """
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")
    actual = classify_case(prob.m, prob.q)
    if case != actual:
        raise ValueError(f"(m, q) = ({prob.m}, {prob.q}) is {actual}, not {case}")
    if not t > 0:
        raise ValueError("t must be positive")
    grid = grid or prob.v0.grid
    mass = prob.mass
    if case == "subcritical":
        hat = _subcritical_hat(prob.m, prob.q, prob.variant, mass, t, grid.xi, n_tau)
        hat[grid.nyquist] = hat[grid.nyquist].real
        return Field(grid, to_values(grid, hat))
    dG = derivative_kernel(KernelSpec(prob.m, t, alpha=1), grid)
    if case == "critical":
        return math.log(t) * critical_constant(prob.m, mass, prob.variant, prob.q) * dG
    if trajectory is None:
        raise ValueError("the supercritical profile needs a trajectory")
    coeff = supercritical_coefficient(trajectory, prob.q, prob.variant).value
    return coeff * dG


def subcritical_profile(m: float, q: float, mass: float, t: float, grid: SpectralGrid,
                        variant: str = "signed_power", n_tau: int = 512) -> Field:
    """Subcritical profile for arbitrary ``m > 1`` and ``1 < q < m + 1``."""
    if not (m > 1 and 1 < q < m + 1):
        raise ValueError("need m > 1 and 1 < q < m + 1")
    hat = _subcritical_hat(m, q, variant, mass, t, grid.xi, n_tau)
    hat[grid.nyquist] = hat[grid.nyquist].real
    return Field(grid, to_values(grid, hat))


class DecayFits(NamedTuple):
    l2: RateFit
    dx_l2: RateFit
    linf: RateFit


def decay_check(traj: Trajectory, m: float,
                window: Optional[Tuple[float, float]] = None) -> DecayFits:
    """Fitted slopes of ``|v|_2``, ``|v_x|_2`` and ``|v|_inf``.

    The default window is ``[T/4, T]`` with ``T`` the last sample time.
    Expected values for the model are ``-1/2m``, ``-3/2m`` and ``-1/m``.
    """
    if not m > 0:
        raise ValueError("m must be positive")
    T = float(traj.times[-1])
    window = window or (T / 4, T)
    n = traj.norms
    return DecayFits(
        fit_power_law(traj.times, n[:, 0], window),
        fit_power_law(traj.times, n[:, 2], window),
        fit_power_law(traj.times, n[:, 1], window),
    )
