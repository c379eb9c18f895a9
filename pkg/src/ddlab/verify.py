"""Acceptance checks, one function per numbered criterion.

Every check returns a :class:`CriterionResult` with a PASS/FAIL verdict and
a table of the measured quantities, so the command-line runner and the
test-suite report the same numbers.  Grids, data and windows are fixed
inside each check; only the random seed comes from the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import analysis, data, expansion, kernels, nonlinear, semigroups
from .grid import Field, lp_norm, make_grid, to_values

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all", "TERM_TABLE_M2_N2"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    rows: List[Dict[str, object]] = field(default_factory=list)
    note: str = ""

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        extra = f" ({self.note})" if self.note else ""
        return f"criterion {self.number:2d} {self.status}: {self.title}{extra}"


def _slope(times, values, window=None) -> float:
    return analysis.fit_power_law(times, values, window).exponent


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# --- 1 -------------------------------------------------------------------

def criterion_01(seed: int = 0) -> CriterionResult:
    grid = make_grid(4096, 200.0)
    rows, ok = [], True
    for m in (2.0, 2.5, 3.0, 4.0):
        for j in (0, 1, 2):
            for t in (0.5, 1.0, 2.0, 8.0):
                num = lp_norm(kernels.derivative_kernel(kernels.KernelSpec(m, t, alpha=j), grid), 2)
                exact = kernels.kernel_l2_closed_form(m, j, t)
                err = _rel(num, exact)
                good = err <= 1e-6
                ok &= good
                rows.append(dict(m=m, j=j, t=t, grid_l2=num, closed_form=exact, rel_err=err, pass_=good))
    return CriterionResult(1, "kernel L2 norms match closed form to 1e-6", ok, rows)


# --- 2 -------------------------------------------------------------------

def criterion_02(seed: int = 0) -> CriterionResult:
    grid = make_grid(4096, 400.0)
    ts = np.geomspace(4.0, 64.0, 9)
    rows, ok = [], True
    for m in (2.0, 3.0):
        for j in (0, 1):
            fields = [kernels.derivative_kernel(kernels.KernelSpec(m, t, alpha=j), grid) for t in ts]
            for p in (1.0, 2.0, np.inf):
                s = _slope(ts, [lp_norm(f, p) for f in fields])
                exp = -j / m - (1.0 / m) * (1.0 - 1.0 / p)
                good = abs(s - exp) <= 0.02 * max(abs(exp), 1.0 / m)
                ok &= good
                rows.append(dict(m=m, j=j, p=p, slope=s, expected=exp, pass_=good))
    return CriterionResult(2, "kernel L^p scaling slopes within 2%", ok, rows)


# --- 3 -------------------------------------------------------------------

def criterion_03(seed: int = 0) -> CriterionResult:
    grid = make_grid(4096, 200.0)
    rows, ok = [], True
    for m in (2.0, 2.5, 3.0, 4.0):
        for j in (1, 2, 3):
            K = kernels.bessel_kernel(m, j, grid)
            mom = expansion.moments(K, 1, threshold=1.0)
            i0 = abs(mom[0] - 1.0)
            i1 = abs(mom[1])
            good = i0 <= 1e-9 and i1 <= 1e-9
            ok &= good
            rows.append(dict(check="moments", m=m, j=j, value=max(i0, i1), pass_=good))
    g2 = make_grid(4096, 50.0)
    K2 = kernels.bessel_kernel(2.0, 1, g2, sampling="nodal")
    off = np.abs(g2.x) > 0.1
    err = float(np.max(np.abs(K2.values - 0.5 * np.exp(-np.abs(g2.x)))[off]))
    good = err <= 1e-6
    ok &= good
    rows.append(dict(check="K2_vs_exp", m=2.0, j=1, value=err, pass_=good))
    return CriterionResult(3, "Bessel kernel mass, first moment, and K_2 closed form", ok, rows)


# --- 4 -------------------------------------------------------------------

def random_data(grid, rng: np.random.Generator) -> Field:
    """Sum of three random Gaussians (random centers, widths, signed masses)."""
    vals = np.zeros(grid.n)
    for _ in range(3):
        c = rng.uniform(-5, 5)
        w = rng.uniform(0.5, 2.0)
        a = rng.uniform(-1, 1)
        vals += data.gaussian(grid, c, w, a).values
    return Field(grid, vals)


def criterion_04(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    grid = make_grid(1024, 60.0)
    phases = [semigroups.PhaseFunction("heat", 2.5), semigroups.PhaseFunction("bbm", 3.0),
              semigroups.PhaseFunction("kdv", 2.0)]
    worst = {ph.kind: [0.0, 0.0] for ph in phases}
    for _ in range(100):
        v0 = random_data(grid, rng)
        s, t = rng.uniform(0, 5, 2)
        scale_mass = float(np.sum(np.abs(v0.values)) * grid.dx)
        scale_l2 = lp_norm(v0, 2)
        for ph in phases:
            vt = semigroups.apply_semigroup(ph, float(t), v0)
            dm = abs(vt.integral() - v0.integral()) / scale_mass
            dl = semigroups.semigroup_property_check(ph, float(s), float(t), v0) / scale_l2
            w = worst[ph.kind]
            w[0], w[1] = max(w[0], dm), max(w[1], dl)
    rows, ok = [], True
    for kind, (dm, dl) in worst.items():
        good = dm <= 1e-10 and dl <= 1e-10
        ok &= good
        rows.append(dict(phase=kind, max_mass_err=dm, max_semigroup_err=dl, pass_=good))
    return CriterionResult(4, "mass conservation and semigroup law on 100 random data sets", ok, rows)


# --- 5 -------------------------------------------------------------------

HEAT_GRIDS = {2.0: (4096, 400.0), 3.0: (4096, 100.0)}
WINDOW = (16.0, 256.0)


def _times(window=WINDOW, k=10):
    return np.geomspace(window[0], window[1], k)


def criterion_05(seed: int = 0) -> CriterionResult:
    ts = _times()
    rows, ok = [], True
    for m, (n, L) in HEAT_GRIDS.items():
        grid = make_grid(n, L)
        v0 = data.gaussian(grid, 0.5, 0.5)
        ph = semigroups.PhaseFunction("heat", m)
        exact = [semigroups.apply_semigroup(ph, t, v0) for t in ts]
        for N in (0, 1, 2):
            parts = [expansion.heat_expansion(v0, N, m, t) for t in ts]
            for p in (2.0, np.inf):
                r = [expansion.residual_norm(e, s, p) for e, s in zip(exact, parts)]
                sl = _slope(ts, r)
                exp = -(1.0 / m) * (1.0 - 1.0 / p) - (N + 1) / m
                good = _rel(sl, exp) <= 0.05
                ok &= good
                rows.append(dict(m=m, N=N, p=p, slope=sl, expected=exp, rel_err=_rel(sl, exp), pass_=good))
    return CriterionResult(5, "heat expansion residual slopes within 5%", ok, rows)


# --- 6 -------------------------------------------------------------------

# derivative order -> {(moment index, power of t): weight} for m = 2, N = 2
TERM_TABLE_M2_N2 = {
    0: {(0, 0): Fraction(1)},
    1: {(1, 0): Fraction(1)},
    2: {(2, 0): Fraction(1)},
    3: {(0, 1): Fraction(-1)},
    4: {(0, 1): Fraction(1), (1, 1): Fraction(-1)},
    6: {(0, 2): Fraction(1, 2)},
}


def reference_term_table(dispersion_sign: int) -> Dict[int, Dict[tuple, Fraction]]:
    """Expected m = 2, N = 2 table; odd powers of ``d_x M`` flip with the sign."""
    flip = -dispersion_sign  # the reference table is written for sign -1
    out = {}
    for k, row in TERM_TABLE_M2_N2.items():
        # orders 3 and 4-with-M_1 carry one factor d_x M
        new = {}
        for (a, tp), w in row.items():
            r = 1 if (k, a) in ((3, 0), (4, 1)) else 0
            new[(a, tp)] = w * (flip**r)
        out[k] = new
    return out


BBM_GRIDS = {2.0: (4096, 400.0), 3.0: (4096, 100.0), 2.5: (8192, 400.0)}


def _bbm_scaled(m, N, ts, v0, fractional=False):
    ph = semigroups.PhaseFunction("bbm", m)
    out = []
    for t in ts:
        exact = semigroups.apply_semigroup(ph, t, v0)
        if fractional:
            part = expansion.linear_expansion_fractional_m(v0, m, t)
        else:
            part = expansion.linear_expansion_integer_m(v0, N, m, t)
        out.append(expansion.residual_norm(exact, part, 2) * t ** (1 / (2 * m) + N / m))
    return np.array(out)


def criterion_06(seed: int = 0) -> CriterionResult:
    ts = _times()
    rows, ok = [], True
    for m, N in ((2.0, 0), (2.0, 1), (3.0, 0), (3.0, 1), (3.0, 2)):
        n, L = BBM_GRIDS[m]
        grid = make_grid(n, L)
        v0 = data.gaussian(grid, 0.5, 0.5)
        sc = _bbm_scaled(m, N, ts, v0)
        sl = _slope(ts, sc)
        bound = -(1.0 / m) * (1 - 0.02)
        good = sl <= bound
        ok &= good
        rows.append(dict(check="scaled_slope", m=m, N=N, slope=sl, expected=-1.0 / m, pass_=good))
    grid = make_grid(256, 20.0)
    mom = expansion.moments(data.gaussian(grid), 2)
    for sign in (-1, 1):
        table = expansion.collapse_even_m(expansion.bbm_integer_terms(mom, 2, 2, 1.0, sign))
        good = table == reference_term_table(sign)
        ok &= good
        rows.append(dict(check="m2_N2_table", m=2.0, N=2, slope=float(sign), expected=float(sign), pass_=good))
    return CriterionResult(6, "integer-m expansion scaled residual slopes and m=2 term table", ok, rows)


# --- 7 -------------------------------------------------------------------

LONG_T = 1024.0


def criterion_07(seed: int = 0) -> CriterionResult:
    m = 2.5
    ts = _times((LONG_T / 4, LONG_T))
    n, L = BBM_GRIDS[m]
    grid = make_grid(n, L)
    v0 = data.gaussian(grid, 0.5, 0.5)
    sc = _bbm_scaled(m, 1, ts, v0, fractional=True)
    sl = _slope(ts, sc)
    good = sl <= -(1.0 / m) * (1 - 0.02)
    row = dict(m=m, t_min=ts[0], t_max=ts[-1], slope=sl, expected=-1.0 / m, pass_=good)
    return CriterionResult(7, "fractional-m three-term expansion scaled slope", good, [row])


# --- 8 -------------------------------------------------------------------

def criterion_08(seed: int = 0) -> CriterionResult:
    m = 2.0
    grid = make_grid(8192, 600.0)
    u0 = data.gaussian(grid, 0.5, 0.5)
    ph = semigroups.PhaseFunction("kdv", m)
    ts = _times((LONG_T / 4, LONG_T))
    sc = np.array([
        expansion.residual_norm(semigroups.apply_semigroup(ph, t, u0), expansion.kdv_expansion(u0, 2, m, t), 2)
        * t ** 1.25 for t in ts])
    sl = _slope(ts, sc)
    bounded = bool(np.all(np.isfinite(sc)) and sc.max() <= sc[0] * (1 + 1e-12))
    good = bounded and sl <= -0.5 * (1 - 0.05)
    row = dict(m=m, N=2, t_min=ts[0], t_max=ts[-1], slope=sl, expected=-0.5, max_scaled=sc.max(),
               bounded=bounded, pass_=good)
    return CriterionResult(8, "KdV-type expansion scaled residual bounded with slope -1/2", good, [row])


# --- 9 -------------------------------------------------------------------

def criterion_09(seed: int = 0) -> CriterionResult:
    ts = _times()
    rows, ok = [], True
    for m, (n, L) in HEAT_GRIDS.items():
        grid = make_grid(n, L)
        for j in (1, 2, 3):
            r = []
            for t in ts:
                sym = kernels.heat_symbol(m, t, grid.xi) * ((1 + np.abs(grid.xi) ** m) ** (-j) - 1)
                r.append(lp_norm(Field(grid, to_values(grid, sym.astype(complex))), 2))
            sl = _slope(ts, r)
            exp = -1.0 / m - 1.0 / (2 * m)
            sharp = -1.0 - 1.0 / (2 * m)
            good = _rel(sl, exp) <= 0.05
            ok &= good
            rows.append(dict(m=m, j=j, slope=sl, expected=exp, rel_err=_rel(sl, exp),
                             sharp_rate=sharp, rel_err_sharp=_rel(sl, sharp), pass_=good))
    return CriterionResult(9, "G*K^j - G slope within 5% of -1/m - 1/2m", ok, rows)


# --- 10 ------------------------------------------------------------------

def _small_gaussian(grid, center=0.0, width=1.0, smallness=0.1):
    return data.scale_to_smallness(data.gaussian(grid, center, width), smallness)


def criterion_10(seed: int = 0) -> CriterionResult:
    grid = make_grid(1024, 100.0)
    prob = nonlinear.NonlinearProblem(3.0, 4.0, "abs_power", _small_gaussian(grid), 8.0, 0.01)
    pic = nonlinear.picard_solve(prob)
    dirc = nonlinear.direct_solve(prob)
    diff = float(np.sqrt(np.max(np.sum((pic.values - dirc.values) ** 2, axis=1)) * grid.dx))
    ratios = pic.aux["contraction_ratios"]
    rmax = float(ratios.max()) if ratios.size else 0.0
    good = diff <= 1e-4 and rmax < 0.5
    row = dict(sup_l2_diff=diff, max_contraction_ratio=rmax, iterations=pic.aux["iterations"], pass_=good)
    return CriterionResult(10, "Picard and direct solvers agree; contraction ratio < 0.5", good, [row])


# --- 11 ------------------------------------------------------------------

NONLINEAR_T = 128.0


def _nonlinear_times():
    return (0.0,) + tuple(float(t) for t in np.round(np.geomspace(16.0, NONLINEAR_T, 15), 2))


def criterion_11(seed: int = 0) -> CriterionResult:
    rows, ok = [], True
    for m, q, L in ((3.0, 4.0, 100.0), (2.5, 4.0, 150.0)):
        grid = make_grid(1024, L)
        prob = nonlinear.NonlinearProblem(m, q, "abs_power", _small_gaussian(grid), NONLINEAR_T, 0.01,
                                          sample_times=_nonlinear_times())
        fits = nonlinear.decay_check(nonlinear.direct_solve(prob), m, (16.0, NONLINEAR_T))
        for name, fit, exp in zip(("l2", "dx_l2", "linf"), fits, (-0.5 / m, -1.5 / m, -1.0 / m)):
            good = _rel(fit.exponent, exp) <= 0.10
            ok &= good
            rows.append(dict(m=m, q=q, norm=name, slope=fit.exponent, expected=exp, pass_=good))
    return CriterionResult(11, "nonlinear small-data decay slopes within 10%", ok, rows)


# --- 12 ------------------------------------------------------------------

def criterion_12(seed: int = 0) -> CriterionResult:
    m, q = 3.0, 5.0
    grid = make_grid(1024, 100.0)
    grid_t = np.union1d(np.geomspace(16.0, NONLINEAR_T, 8).round(2), [64.0, NONLINEAR_T])
    times = (0.0,) + tuple(float(t) for t in grid_t)
    prob = nonlinear.NonlinearProblem(m, q, "signed_power", _small_gaussian(grid), NONLINEAR_T, 0.01,
                                      sample_times=times)
    traj = nonlinear.direct_solve(prob)
    coeff = nonlinear.supercritical_coefficient(traj, q, prob.variant)
    lin = semigroups.semigroup_trajectory(prob.phase, traj.times, prob.v0)
    rows = []
    with_c, without_c, tt = [], [], []
    for i, t in enumerate(traj.times):
        if t < 16.0:
            continue
        P = coeff.value * kernels.derivative_kernel(kernels.KernelSpec(m, t, alpha=1), grid).values
        d = traj.values[i] - lin.values[i]
        scale = t ** (0.5 / m + 1.0 / m)
        a = float(np.sqrt(np.sum(d**2) * grid.dx)) * scale
        b = float(np.sqrt(np.sum((d + P) ** 2) * grid.dx)) * scale
        tt.append(t), without_c.append(a), with_c.append(b)
        rows.append(dict(check="scaled_residual", t=t, without=a, with_correction=b, pass_=b < a))
    tt, with_c, without_c = map(np.array, (tt, with_c, without_c))
    reduce_ok = all(with_c[np.isin(tt, (64.0, 128.0))] < without_c[np.isin(tt, (64.0, 128.0))])
    reduce_ok &= bool(np.isin((64.0, 128.0), tt).all())
    decreasing = bool(np.all(np.diff(with_c) < 0))
    M = 0.7
    num = nonlinear.critical_constant(2.0, M, "signed_power")
    exact = M**3 / (4 * math.pi * math.sqrt(3.0))
    const_ok = _rel(num, exact) <= 1e-6
    rows.append(dict(check="coefficient", t=NONLINEAR_T, without=coeff.value, with_correction=coeff.tail_bound,
                     pass_=True))
    rows.append(dict(check="critical_constant", t=1.0, without=num, with_correction=exact, pass_=const_ok))
    ok = reduce_ok and decreasing and const_ok
    note = f"reduces={reduce_ok} decreasing={decreasing} constant={const_ok}"
    return CriterionResult(12, "supercritical correction and critical constant", ok, rows, note)


# --- 13 ------------------------------------------------------------------

def _draw(lemma: str, rng: np.random.Generator):
    if lemma == "product":
        a, b = rng.uniform(0.05, 4.0, 2)
        if max(a, b) <= 1:
            b = 1.0 + rng.uniform(0.05, 3.0)
        return float(a), float(b)
    a = float(rng.uniform(-0.95, 0.0))
    if lemma == "log":
        return a, -1.0
    b = float(rng.uniform(-3.0, 0.0))
    while abs(b + 1.0) < 0.05:
        b = float(rng.uniform(-3.0, 0.0))
    return a, b


def criterion_13(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    ts = np.concatenate([[0.0, 1.0], np.geomspace(10.0, 1e4, 25)])
    rows, ok = [], True
    for lemma in ("product", "growth", "log"):
        for _ in range(20):
            a, b = _draw(lemma, rng)
            rep = analysis.check_convolution_inequality(a, b, ts)
            good = rep.finite and rep.monotone
            ok &= good
            rows.append(dict(lemma=lemma, a=a, b=b, ratio_t10=float(rep.ratios[2]),
                             ratio_max=float(np.max(rep.ratios)), ratio_end=float(rep.ratios[-1]),
                             tail_slope=rep.tail_slope, bounded=rep.bounded, monotone=rep.monotone,
                             pass_=good))
    return CriterionResult(13, "convolution-integral ratios finite and non-increasing beyond t=10", ok, rows)


CRITERIA: Dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_01, 2: criterion_02, 3: criterion_03, 4: criterion_04, 5: criterion_05,
    6: criterion_06, 7: criterion_07, 8: criterion_08, 9: criterion_09, 10: criterion_10,
    11: criterion_11, 12: criterion_12, 13: criterion_13,
}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    if number not in CRITERIA:
        raise ValueError(f"no criterion {number}")
    return CRITERIA[number](seed)


def run_all(numbers: Optional[Sequence[int]] = None, seed: int = 0) -> List[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    return [run_criterion(k, seed) for k in numbers]
