"""Power-law fits of norm histories and numeric convolution-integral checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

__all__ = [
    "RateFit",
    "InequalityReport",
    "fit_power_law",
    "select_lemma",
    "convolution_integral",
    "check_convolution_inequality",
    "splitting_constant",
]

MIN_SAMPLES = 8
MIN_SPAN = 4.0


@dataclass(frozen=True)
class RateFit:
    """Least-squares line ``log y = exponent * log t + log prefactor``."""

    exponent: float
    prefactor: float
    fit_residual: float
    window: Tuple[float, float]
    n_samples: int

    def within(self, expected: float, rel: float, floor: float = 0.0) -> bool:
        """``|exponent - expected| <= rel * max(|expected|, floor)``."""
        return abs(self.exponent - expected) <= rel * max(abs(expected), floor)


def fit_power_law(times: Sequence[float], values: Sequence[float],
                  window: Optional[Tuple[float, float]] = None) -> RateFit:
    """Fit ``values ~ prefactor * times**exponent`` in log-log coordinates.

    Parameters
    ----------
    times, values : array_like
        Samples; only those with ``window[0] <= t <= window[1]`` are used.
    window : (float, float), optional
        Defaults to the full sample range.

    Raises
    ------
    ValueError
        If fewer than 8 samples fall in the window, the window spans less
        than a factor 4 in time, or any value in it is not positive.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape:
        raise ValueError("times and values must have the same shape")
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    sel = (t >= lo * (1 - 1e-12)) & (t <= hi * (1 + 1e-12))
    t, y = t[sel], y[sel]
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples in the window, got {t.size}")
    if not t.min() > 0 or t.max() / t.min() < MIN_SPAN * (1 - 1e-12):
        raise ValueError(f"window must span a factor >= {MIN_SPAN} in positive time")
    if not np.all(y > 0) or not np.all(np.isfinite(y)):
        raise ValueError("values must be positive and finite in the fit window")
    lt, ly = np.log(t), np.log(y)
    (slope, intercept), *_ = np.linalg.lstsq(np.column_stack([lt, np.ones_like(lt)]), ly, rcond=None)
    resid = ly - (slope * lt + intercept)
    return RateFit(float(slope), float(np.exp(intercept)), float(np.sqrt(np.mean(resid**2))),
                   (float(t.min()), float(t.max())), int(t.size))


@dataclass(frozen=True)
class InequalityReport:
    """Quadrature of a convolution integral against its claimed decay shape."""

    lemma: str
    a: float
    b: float
    times: np.ndarray
    lhs: np.ndarray
    rhs_shape: np.ndarray
    ratios: np.ndarray
    transient: float

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.ratios)))

    def _tail(self):
        return self.ratios[self.times >= self.transient]

    @property
    def monotone(self) -> bool:
        """Ratios never increase (to 1e-12 relative) for ``t >= transient``."""
        r = self._tail()
        return bool(np.all(np.diff(r) <= 1e-12 * np.abs(r[1:])))

    @property
    def tail_slope(self) -> float:
        """Log-log slope of the ratio over the last decade of ``times``."""
        t = self.times
        sel = t >= t[-1] / 10
        if sel.sum() < 2 or np.any(self.ratios[sel] <= 0):
            return float("nan")
        return float(np.polyfit(np.log(t[sel]), np.log(self.ratios[sel]), 1)[0])

    @property
    def constant(self) -> float:
        """Explicit constant of the estimate, see :func:`splitting_constant`."""
        return splitting_constant(self.lemma, self.a, self.b)

    @property
    def bounded(self) -> bool:
        """Finite ratios, all at most :attr:`constant` (to 1e-9 relative)."""
        return self.finite and bool(np.all(self.ratios <= self.constant * (1 + 1e-9)))


def select_lemma(a: float, b: float) -> str:
    """Which decay estimate covers ``(a, b)``.

    ``"product"``: ``a, b > 0`` and ``max(a, b) > 1`` with integrand
    ``(1+t-s)^-a (1+s)^-b``.  ``"growth"``: ``-1 < a <= 0``, ``b <= 0``,
    ``b != -1`` with integrand ``(1+t-s)^a (1+s)^b``.  ``"log"``:
    ``-1 < a <= 0``, ``b = -1``.
    """
    if a > 0 and b > 0 and max(a, b) > 1:
        return "product"
    if -1 < a <= 0 and b == -1:
        return "log"
    if -1 < a <= 0 and b <= 0:
        return "growth"
    raise ValueError(f"(a, b) = ({a}, {b}) is outside every supported estimate")


def _half_integral_constant(c: float, other: float) -> float:
    # sup_t (1+t)^(min(c, other)) * (1+t)^(-other) * int_0^(t/2) (1+s)^(-c) ds, with other > 1 if c <= 1
    if c > 1:
        return 1.0 / (c - 1.0)
    if c < 1:
        return 1.0 / (1.0 - c)
    return 1.0 / (math.e * (other - 1.0))


def splitting_constant(lemma: str, a: float, b: float) -> float:
    """Constant ``C`` obtained by splitting the integral at ``t/2``.

    On each half one factor is bounded by its value at ``t/2`` (using
    ``1 + t/2 >= (1 + t)/2``) and the other is integrated exactly, so the
    integral never exceeds ``C`` times its decay shape for any ``t >= 0``.
    """
    if lemma == "product":
        return 2.0**a * _half_integral_constant(b, a) + 2.0**b * _half_integral_constant(a, b)
    if lemma == "log":
        return 2.0 ** (-a) + 2.0 / (a + 1.0)
    if lemma == "growth":
        return 2.0 ** (-a) / abs(b + 1.0) + 2.0 ** (-b) / (a + 1.0)
    raise ValueError(f"unknown lemma {lemma!r}")


def convolution_integral(a: float, b: float, t: float, lemma: Optional[str] = None) -> float:
    """Adaptive quadrature of the lemma's integrand over ``[0, t]``."""
    lemma = lemma or select_lemma(a, b)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    if lemma == "product":
        f = lambda s: (1.0 + t - s) ** (-a) * (1.0 + s) ** (-b)  # noqa: E731
    else:
        f = lambda s: (1.0 + t - s) ** a * (1.0 + s) ** b  # noqa: E731
    # geometric breakpoints toward both ends resolve the boundary layers
    half = 0.5 * t
    inner = [d for d in 10.0 ** np.arange(0, 16) if d < half]
    edges = sorted({0.0, half, t, *inner, *(t - d for d in inner)})
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
        total += val
    return total


def _shape(lemma: str, a: float, b: float, t: np.ndarray) -> np.ndarray:
    if lemma == "product":
        return (1.0 + t) ** (-min(a, b))
    if lemma == "log":
        return (1.0 + t) ** a * (1.0 + np.log1p(t))
    if b > -1:
        return (1.0 + t) ** (a + b + 1)
    return (1.0 + t) ** a


def check_convolution_inequality(a: float, b: float, t_list: Sequence[float],
                                 transient: float = 10.0) -> InequalityReport:
    """Compare the integral with its claimed decay shape at each ``t``.

    At ``t = 0`` both the integral and the ratio are 0.
    """
    lemma = select_lemma(a, b)
    t = np.asarray(t_list, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    lhs = np.array([convolution_integral(a, b, ti, lemma) for ti in t])
    rhs = _shape(lemma, a, b, t)
    return InequalityReport(lemma, a, b, t, lhs, rhs, lhs / rhs, transient)
