"""Moment-based asymptotic expansions of the linear evolutions.

Each expansion is first assembled as a list of :class:`ExpansionTerm`
(pure combinatorics) and then evaluated on a grid in one inverse transform.
Keeping the two steps apart lets the term tables be checked on their own.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .grid import Field, SpectralGrid, _lp, to_values
from .kernels import KernelSpec, kernel_symbol

__all__ = [
    "MomentVector",
    "ExpansionTerm",
    "MomentTailWarning",
    "moments",
    "heat_terms",
    "bbm_integer_terms",
    "bbm_fractional_terms",
    "kdv_terms",
    "evaluate_terms",
    "heat_expansion",
    "linear_expansion_integer_m",
    "linear_expansion_fractional_m",
    "kdv_expansion",
    "preliminary_expansion_with_K",
    "residual_norm",
    "collapse_even_m",
]

MAX_ORDER = 20


class MomentTailWarning(UserWarning):
    """A moment integrand is not negligible near the domain edge."""


@dataclass(frozen=True)
class MomentVector:
    """``values[a] = (-1)^a / a! * int x^a v0 dx`` for ``a = 0..N``."""

    values: np.ndarray
    tail_estimate: np.ndarray
    threshold: float

    @property
    def N(self) -> int:
        return self.values.size - 1

    @property
    def trusted(self) -> np.ndarray:
        return self.tail_estimate <= self.threshold

    def __getitem__(self, a: int) -> float:
        return float(self.values[a])


def _check_order(N: int) -> int:
    if int(N) != N or N < 0:
        raise ValueError(f"N must be a non-negative integer, got {N}")
    if N > MAX_ORDER:
        raise ValueError(f"N > {MAX_ORDER} is not supported")
    return int(N)


def moments(v0: Field, N: int, threshold: float = 1e-10) -> MomentVector:
    """Signed, factorial-scaled moments of ``v0`` by grid quadrature.

    The node ``x = -L`` is weighted as the average of ``(-L)^a`` and
    ``L^a`` (trapezoid closure of the periodic integrand), which keeps odd
    moments of even data exactly zero.  Moments whose integrand still has
    more than ``threshold`` of its mass beyond ``|x| > L/2`` are flagged and
    a :class:`MomentTailWarning` is issued.
    """
    N = _check_order(N)
    grid = v0.grid
    x = grid.x
    v = v0.values
    far = np.abs(x) > 0.5 * grid.L
    vals = np.empty(N + 1)
    tails = np.empty(N + 1)
    for a in range(N + 1):
        w = x**a
        w[0] = 0.5 * ((-grid.L) ** a + grid.L**a)
        vals[a] = (-1) ** a / math.factorial(a) * np.sum(w * v) * grid.dx
        absint = np.abs(w * v)
        total = absint.sum()
        tails[a] = absint[far].sum() / total if total > 0 else 0.0
    mv = MomentVector(vals, tails, threshold)
    if not np.all(mv.trusted):
        bad = np.flatnonzero(~mv.trusted).tolist()
        warnings.warn(f"moments {bad} have boundary tail above {threshold:g}", MomentTailWarning,
                      stacklevel=2)
    return mv


@dataclass(frozen=True)
class ExpansionTerm:
    """One profile ``coefficient * kernel(spec)``.

    ``coefficient = weight * t**(r + j) * M_alpha`` where ``weight`` is the
    exact rational ``sign^r / (r! j!)``.
    """

    coefficient: float
    spec: KernelSpec
    weight: Fraction
    moment: float

    @property
    def provenance(self) -> Tuple[int, int, int]:
        return (self.spec.r, self.spec.j, self.spec.alpha)

    @property
    def time_power(self) -> int:
        return self.spec.r + self.spec.j


def _term(mom: MomentVector, m, t, r, j, alpha, weight, bessel=0) -> ExpansionTerm:
    spec = KernelSpec(m=m, t=t, r=r, j=j, alpha=alpha, bessel_power=bessel)
    ma = mom[alpha]
    return ExpansionTerm(float(weight) * t ** (r + j) * ma, spec, weight, ma)


def _require_integer_m(m) -> int:
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m}")
    return int(m)


def heat_terms(mom: MomentVector, N: int, m: float, t: float) -> List[ExpansionTerm]:
    N = _check_order(N)
    return [_term(mom, m, t, 0, 0, a, Fraction(1)) for a in range(N + 1)]


def bbm_integer_terms(mom: MomentVector, N: int, m: int, t: float, dispersion_sign: int = 1,
                      with_bessel: bool = False) -> List[ExpansionTerm]:
    """Terms ``t^r/r! t^j/j! M_a (d_x M)^r M^(2j) d_x^a G_m(t)``.

    Pairs ``(r, j)`` with ``N - r - m j < 0`` are dropped; ``alpha`` runs
    over ``0..N - r - m j``.  The dispersive factor picks up ``(-s)^r`` for
    a phase with dispersion sign ``s``.  ``with_bessel`` keeps the
    ``K_m^(r+j)`` convolutions of the unreplaced expansion.
    """
    N = _check_order(N)
    m = _require_integer_m(m)
    terms = []
    for r in range(N + 1):
        for j in range(N // 2 + 1):
            top = N - r - m * j
            if top < 0:
                continue
            w = Fraction((-dispersion_sign) ** r, math.factorial(r) * math.factorial(j))
            for a in range(top + 1):
                terms.append(_term(mom, m, t, r, j, a, w, bessel=(r + j) if with_bessel else 0))
    return terms


def bbm_fractional_terms(mom: MomentVector, m: float, t: float,
                         dispersion_sign: int = 1) -> List[ExpansionTerm]:
    if float(m).is_integer() or not m > 2:
        raise ValueError(f"m must be a non-integer > 2, got {m}")
    return [
        _term(mom, m, t, 0, 0, 0, Fraction(1)),
        _term(mom, m, t, 0, 0, 1, Fraction(1)),
        _term(mom, m, t, 1, 0, 0, Fraction(-dispersion_sign)),
    ]


def kdv_terms(mom: MomentVector, N: int, m: int, t: float) -> List[ExpansionTerm]:
    N = _check_order(N)
    m = _require_integer_m(m)
    return [
        _term(mom, m, t, r, 0, a, Fraction(1, math.factorial(r)))
        for r in range(N + 1)
        for a in range(N - r + 1)
    ]


def evaluate_terms(terms: Sequence[ExpansionTerm], grid: SpectralGrid) -> Field:
    total = np.zeros(grid.n, dtype=complex)
    for term in terms:
        if term.coefficient != 0.0:
            total += term.coefficient * kernel_symbol(term.spec, grid.xi)
    total[grid.nyquist] = total[grid.nyquist].real
    return Field(grid, to_values(grid, total))


def _finish(terms, grid, return_terms):
    f = evaluate_terms(terms, grid)
    return (f, terms) if return_terms else f


def heat_expansion(v0: Field, N: int, m: float, t: float, grid: Optional[SpectralGrid] = None,
                   return_terms: bool = False):
    """``sum_{a<=N} M_a(v0) d_x^a G_m(t)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    terms = heat_terms(moments(v0, N), N, m, t)
    return _finish(terms, grid or v0.grid, return_terms)


def linear_expansion_integer_m(v0: Field, N: int, m: int, t: float,
                               grid: Optional[SpectralGrid] = None, dispersion_sign: int = 1,
                               return_terms: bool = False):
    """Complete expansion of the linearized flow for integer ``m``."""
    if not t > 0:
        raise ValueError("t must be positive")
    terms = bbm_integer_terms(moments(v0, N), N, m, t, dispersion_sign)
    return _finish(terms, grid or v0.grid, return_terms)


def linear_expansion_fractional_m(v0: Field, m: float, t: float,
                                  grid: Optional[SpectralGrid] = None, dispersion_sign: int = 1,
                                  return_terms: bool = False):
    """``M_0 G_m + M_1 d_x G_m - s t M_0 (d_x M) G_m`` for non-integer ``m``."""
    if not t > 0:
        raise ValueError("t must be positive")
    terms = bbm_fractional_terms(moments(v0, 1), m, t, dispersion_sign)
    return _finish(terms, grid or v0.grid, return_terms)


def kdv_expansion(u0: Field, N: int, m: int, t: float, grid: Optional[SpectralGrid] = None,
                  return_terms: bool = False):
    """``sum_j t^j/j! (d_x M)^j sum_{a<=N-j} M_a d_x^a G_m(t)``."""
    if not t > 0:
        raise ValueError("t must be positive")
    terms = kdv_terms(moments(u0, N), N, m, t)
    return _finish(terms, grid or u0.grid, return_terms)


def preliminary_expansion_with_K(v0: Field, N: int, m: int, t: float,
                                 grid: Optional[SpectralGrid] = None, dispersion_sign: int = 1,
                                 return_terms: bool = False):
    """Integer-``m`` expansion that keeps the ``K_m^(r+j)`` convolutions."""
    if not t > 0:
        raise ValueError("t must be positive")
    terms = bbm_integer_terms(moments(v0, N), N, m, t, dispersion_sign, with_bessel=True)
    return _finish(terms, grid or v0.grid, return_terms)


def residual_norm(exact: Field, partial_sum: Field, p: float) -> float:
    if not exact.grid.same_as(partial_sum.grid):
        raise ValueError("grid mismatch")
    return _lp(exact.values - partial_sum.values, exact.grid.dx, p)


def collapse_even_m(terms: Sequence[ExpansionTerm]) -> Dict[int, Dict[Tuple[int, int], Fraction]]:
    """Rewrite terms for even ``m = 2n`` as plain derivatives of ``G``.

    With ``M = (-1)^n d_x^(2n)`` every term is ``c d_x^k G``.  Returns
    ``{k: {(alpha, time_power): rational weight}}`` with zero weights
    removed.
    """
    table: Dict[int, Dict[Tuple[int, int], Fraction]] = {}
    for term in terms:
        s = term.spec
        if s.bessel_power or int(s.m) != s.m or int(s.m) % 2:
            raise ValueError("collapse_even_m needs even integer m and no K factors")
        n = int(s.m) // 2
        order = s.r * (2 * n + 1) + 4 * n * s.j + s.alpha
        w = term.weight * (-1) ** (n * s.r)
        key = (s.alpha, term.time_power)
        row = table.setdefault(order, {})
        row[key] = row.get(key, Fraction(0)) + w
    return {k: {kk: vv for kk, vv in row.items() if vv != 0} for k, row in sorted(table.items())}
