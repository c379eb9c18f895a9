import itertools
import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddlab import data
from ddlab.analysis import fit_power_law
from ddlab.expansion import (
    MomentTailWarning,
    bbm_integer_terms,
    collapse_even_m,
    evaluate_terms,
    heat_expansion,
    kdv_expansion,
    kdv_terms,
    linear_expansion_fractional_m,
    linear_expansion_integer_m,
    moments,
    preliminary_expansion_with_K,
    residual_norm,
)
from ddlab.grid import Field, lp_norm, make_grid, to_coeffs, to_values
from ddlab.kernels import KernelSpec, derivative_kernel, heat_kernel
from ddlab.semigroups import PhaseFunction, apply_semigroup

SQRT_PI = math.sqrt(math.pi)


@pytest.fixture(scope="module")
def g():
    return make_grid(1024, 30.0)


def mom_vector(values):
    from ddlab.expansion import MomentVector
    return MomentVector(np.array(values, dtype=float), np.zeros(len(values)), 1e-10)


# --- moments ----------------------------------------------------------------

def test_moments_of_heat_kernel(g):
    mom = moments(heat_kernel(2.0, 1.0, g), 3)
    assert mom[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(mom[1]) <= 1e-14 and abs(mom[3]) <= 1e-12
    assert mom[2] == pytest.approx(1.0, abs=1e-12)  # (1/2) int x^2 G_2(x, 1) dx = (1/2) * 2


def test_moments_closed_forms(g):
    e = Field(g, np.exp(-g.x**2))
    assert moments(e, 0)[0] == pytest.approx(SQRT_PI, rel=1e-13)
    assert moments(e, 0)[0] == pytest.approx(1.77245, abs=1e-5)
    o = Field(g, g.x * np.exp(-g.x**2))
    mo = moments(o, 1)
    assert abs(mo[0]) <= 1e-14
    assert mo[1] == pytest.approx(-SQRT_PI / 2, rel=1e-13)


def test_moments_of_shifted_gaussian(g):
    c, w = 0.7, 0.4
    mom = moments(data.gaussian(g, c, w), 3)
    raw = [1.0, c, c**2 + w**2, c**3 + 3 * c * w**2]
    for a in range(4):
        assert mom[a] == pytest.approx((-1) ** a / math.factorial(a) * raw[a], rel=1e-12)


def test_moment_tail_warning():
    g = make_grid(256, 10.0)
    wide = data.gaussian(g, 0.0, 3.0)
    with pytest.warns(MomentTailWarning):
        mv = moments(wide, 2)
    assert not np.all(mv.trusted)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert np.all(moments(data.gaussian(g, 0.0, 0.5), 2).trusted)


@pytest.mark.parametrize("N", [-1, 21])
def test_moment_order_limits(g, N):
    with pytest.raises(ValueError):
        moments(data.gaussian(g), N)


def test_moments_integration_by_parts(g):
    v0 = data.skew_gaussian(g, 0.3, 0.8, 3.0)
    c = to_coeffs(g, v0.values)
    c[g.nyquist] = 0
    dv = to_values(g, 1j * g.xi * c)
    for a in range(1, 6):
        lhs = np.sum(g.x**a * dv) * g.dx
        rhs = -a * np.sum(g.x ** (a - 1) * v0.values) * g.dx
        assert abs(lhs - rhs) <= 1e-8


# --- term lists ---------------------------------------------------------------

def provenance(terms):
    return [t.provenance for t in terms]


def test_integer_expansion_n0_single_term(g):
    f, terms = linear_expansion_integer_m(data.gaussian(g), 0, 3, 2.0, return_terms=True)
    assert provenance(terms) == [(0, 0, 0)]
    assert np.array_equal(f.values, heat_expansion(data.gaussian(g), 0, 3.0, 2.0).values)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_integer_expansion_n1_terms(m):
    mom = mom_vector([1.3, -0.4])
    t = 2.5
    for sign, w in ((-1, 1), (1, -1)):
        terms = bbm_integer_terms(mom, 1, m, t, sign)
        assert provenance(terms) == [(0, 0, 0), (0, 0, 1), (1, 0, 0)]
        assert [float(x.weight) for x in terms] == [1.0, 1.0, w]
        assert terms[2].coefficient == pytest.approx(w * t * 1.3)
        assert terms[1].coefficient == pytest.approx(-0.4)


def test_exclusion_rule_m3_n1_has_three_terms():
    assert len(bbm_integer_terms(mom_vector([1, 1]), 1, 3, 1.0)) == 3


def test_boundary_pair_is_included():
    # N - r - m j = 0 for (r, j) = (0, 1) at m = 2, N = 2
    terms = bbm_integer_terms(mom_vector([1, 1, 1]), 2, 2, 1.0)
    assert (0, 1, 0) in provenance(terms)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 8), st.integers(2, 5))
def test_term_set_matches_index_constraint(N, m):
    terms = bbm_integer_terms(mom_vector([1.0] * (N + 1)), N, m, 1.0)
    expected = {(r, j, a) for r, j, a in itertools.product(range(N + 1), repeat=3)
                if a + r + m * j <= N}
    got = provenance(terms)
    assert len(got) == len(set(got))
    assert set(got) == expected
    for t in terms:
        r, j, _ = t.provenance
        assert t.weight == Fraction((-1) ** r, math.factorial(r) * math.factorial(j))


def term_table_m2_n2(sign):
    """Hand-derived terms for m = 2 (written for sign -1), as {order: {(alpha, t power): weight}}.

    r1 = M0 G, r2 = M1 G' - t M0 G''', r3 = M2 G'' + t (M0 - M1) G'''' + t^2/2 M0 G^(6);
    each factor (d_x M) flips with the dispersion sign.
    """
    f = -sign
    return {
        0: {(0, 0): Fraction(1)},
        1: {(1, 0): Fraction(1)},
        2: {(2, 0): Fraction(1)},
        3: {(0, 1): Fraction(-1) * f},
        4: {(0, 1): Fraction(1), (1, 1): Fraction(-1) * f},
        6: {(0, 2): Fraction(1, 2)},
    }


@pytest.mark.parametrize("sign", [-1, 1])
def test_m2_n2_term_table(sign):
    terms = bbm_integer_terms(mom_vector([1, 1, 1]), 2, 2, 1.0, sign)
    assert collapse_even_m(terms) == term_table_m2_n2(sign)


def test_m2_n2_collapsed_table_matches_fields(g):
    v0 = data.gaussian(g, 0.5, 0.5)
    t = 1.7
    f = linear_expansion_integer_m(v0, 2, 2, t, dispersion_sign=-1)
    mom = moments(v0, 2)
    total = np.zeros(g.n)
    for order, row in collapse_even_m(bbm_integer_terms(mom, 2, 2, t, -1)).items():
        k = derivative_kernel(KernelSpec(2.0, t, alpha=order), g).values
        for (a, tp), w in row.items():
            total += float(w) * mom[a] * t**tp * k
    assert np.max(np.abs(f.values - total)) <= 1e-12


def test_collapse_rejects_odd_m():
    with pytest.raises(ValueError):
        collapse_even_m(bbm_integer_terms(mom_vector([1, 1]), 1, 3, 1.0))


def test_kdv_terms_n2():
    mom = mom_vector([1.0, 2.0, 3.0])
    terms = kdv_terms(mom, 2, 2, 1.5)
    assert provenance(terms) == [(0, 0, 0), (0, 0, 1), (0, 0, 2), (1, 0, 0), (1, 0, 1), (2, 0, 0)]
    third = {t.provenance: t.coefficient for t in terms if t.provenance[0] + t.provenance[2] == 2}
    assert third == {(0, 0, 2): pytest.approx(3.0), (1, 0, 1): pytest.approx(1.5 * 2.0),
                     (2, 0, 0): pytest.approx(1.5**2 / 2 * 1.0)}


def test_kdv_n0_and_heat_n0(g):
    v0 = data.gaussian(g, 0.2, 0.6)
    M0 = v0.integral()
    for f in (kdv_expansion(v0, 0, 2, 3.0), heat_expansion(v0, 0, 2.0, 3.0)):
        assert np.max(np.abs(f.values - M0 * heat_kernel(2.0, 3.0, g).values)) <= 1e-14


def test_fractional_terms(g):
    v0 = data.gaussian(g, 0.5, 0.5)
    t = 3.0
    _, terms = linear_expansion_fractional_m(v0, 2.5, t, dispersion_sign=-1, return_terms=True)
    assert provenance(terms) == [(0, 0, 0), (0, 0, 1), (1, 0, 0)]
    assert terms[2].coefficient == pytest.approx(t * moments(v0, 0)[0], rel=1e-15)
    with pytest.raises(ValueError):
        linear_expansion_fractional_m(v0, 3.0, t)
    with pytest.raises(ValueError):
        linear_expansion_fractional_m(v0, 1.5, t)


def test_fractional_expansion_vanishes_for_mass_and_mean_free_data(g):
    # second derivative of a Gaussian: zero mass and zero first moment
    v0 = Field(g, (4 * g.x**2 - 2) * np.exp(-g.x**2))
    f = linear_expansion_fractional_m(v0, 2.5, 2.0)
    assert np.max(np.abs(f.values)) <= 1e-13


def test_evaluate_terms_matches_kernel_sum(g):
    v0 = data.skew_gaussian(g, 0.0, 1.0, 2.0)
    t = 2.0
    f, terms = linear_expansion_integer_m(v0, 3, 2, t, return_terms=True)
    direct = sum(term.coefficient * derivative_kernel(term.spec, g).values for term in terms)
    assert np.max(np.abs(evaluate_terms(terms, g).values - direct)) <= 1e-12
    assert np.array_equal(f.values, evaluate_terms(terms, g).values)


# --- residuals ----------------------------------------------------------------

def test_residual_norm_basics(g):
    f = data.gaussian(g)
    assert residual_norm(f, f, 2) == 0.0
    with pytest.raises(ValueError):
        residual_norm(f, data.gaussian(make_grid(512, 30.0)), 2)


@pytest.mark.filterwarnings("ignore::ddlab.expansion.MomentTailWarning")  # algebraic tail of G_3
def test_heat_expansion_of_heat_kernel_data():
    # v0 = G_m(., 1) has M_a = 0 for 0 < a < m, so G_m(t + 1) - G_m(t) ~ -d_t G_m(t)
    # decays like ||M G_m(t)||_2 ~ t^(-1 - 1/2m)
    for m in (2.0, 3.0):
        grid = make_grid(4096, 200.0)
        v0 = heat_kernel(m, 1.0, grid)
        ts = np.geomspace(16.0, 256.0, 9)
        r = [residual_norm(heat_kernel(m, 1.0 + t, grid), heat_expansion(v0, 0, m, t), 2) for t in ts]
        assert fit_power_law(ts, r).within(-1.0 - 1.0 / (2 * m), 0.05)


def test_heat_expansion_shifted_gaussian_m2():
    grid = make_grid(4096, 200.0)
    shifted = Field(grid, np.exp(-(grid.x - 1) ** 2 / 4) / math.sqrt(4 * math.pi))
    mom = moments(shifted, 1)
    assert mom[0] == pytest.approx(1.0, abs=1e-12)
    assert mom[1] == pytest.approx(-1.0, abs=1e-12)
    ts = np.geomspace(16.0, 256.0, 9)
    r = []
    for t in ts:
        s = 1.0 + t
        exact = Field(grid, np.exp(-(grid.x - 1) ** 2 / (4 * s)) / math.sqrt(4 * math.pi * s))
        r.append(residual_norm(exact, heat_expansion(shifted, 1, 2.0, t), 2))
    assert fit_power_law(ts, r).within(-1.25, 0.05)


@pytest.mark.parametrize("m, n, L", [(2.0, 4096, 400.0), (3.0, 4096, 100.0)])
def test_heat_expansion_rates_all_p(m, n, L):
    grid = make_grid(n, L)
    v0 = data.gaussian(grid, 0.5, 0.5)
    ph = PhaseFunction("heat", m)
    ts = np.geomspace(4.0, 256.0, 10)
    exact = [apply_semigroup(ph, t, v0) for t in ts]
    for N in (0, 1, 2):
        parts = [heat_expansion(v0, N, m, t) for t in ts]
        for p in (1.0, 2.0, np.inf):
            r = [residual_norm(e, s, p) for e, s in zip(exact, parts)]
            expected = -(1 / m) * (1 - 1 / p) - (N + 1) / m
            assert fit_power_law(ts, r).within(expected, 0.05), (N, p)


def test_heat_residual_bounded_and_improves():
    m = 2.0
    grid = make_grid(4096, 400.0)
    v0 = data.gaussian(grid, 0.5, 0.5)
    ph = PhaseFunction("heat", m)
    ts = np.geomspace(1.0, 256.0, 12)
    for p in (2.0, np.inf):
        scaled = [t ** ((1 / m) * (1 - 1 / p) + 1 / m)
                  * residual_norm(apply_semigroup(ph, t, v0), heat_expansion(v0, 0, m, t), p) for t in ts]
        assert np.all(np.isfinite(scaled))
        assert max(scaled) <= 1.5 * scaled[0]
    exact = apply_semigroup(ph, 64.0, v0)
    for p in (1.0, 2.0, np.inf):
        r0 = residual_norm(exact, heat_expansion(v0, 0, m, 64.0), p)
        r1 = residual_norm(exact, heat_expansion(v0, 1, m, 64.0), p)
        assert r1 <= r0


def test_kdv_residual_slope():
    m = 2
    grid = make_grid(8192, 600.0)
    u0 = data.gaussian(grid, 0.5, 0.5)
    ph = PhaseFunction("kdv", m)
    ts = np.geomspace(256.0, 1024.0, 8)
    r = [residual_norm(apply_semigroup(ph, t, u0), kdv_expansion(u0, 2, m, t), 2) for t in ts]
    assert fit_power_law(ts, r).within(-1.75, 0.05)


def test_preliminary_expansion_n0_is_k_free(g):
    v0 = data.gaussian(g, 0.5, 0.5)
    a = preliminary_expansion_with_K(v0, 0, 2, 3.0)
    assert np.max(np.abs(a.values - heat_expansion(v0, 0, 2.0, 3.0).values)) <= 1e-15


@pytest.mark.parametrize("m, n, L", [(2, 4096, 400.0), (3, 4096, 100.0)])
def test_preliminary_expansion_difference_slope(m, n, L):
    grid = make_grid(n, L)
    v0 = data.gaussian(grid, 0.5, 0.5)
    M0 = v0.integral()
    ts = np.geomspace(16.0, 256.0, 10)
    d = [lp_norm(preliminary_expansion_with_K(v0, 1, m, t) - linear_expansion_integer_m(v0, 1, m, t), 2)
         / (t * M0) for t in ts]
    slope = fit_power_law(ts, d).exponent
    stated = -(1 + (m + 1) + 1) / m - 1 / (2 * m)
    sharp = -2 - 1 / m - 1 / (2 * m)  # (K_hat - 1) i xi |xi|^m ~ -i xi |xi|^(2m)
    assert abs(slope - sharp) <= 0.05 * abs(sharp)
    assert slope <= stated * (1 - 0.05)
    if m == 2:
        assert stated == sharp


@pytest.mark.parametrize("m, n, L", [(2, 4096, 400.0), (3, 4096, 100.0)])
def test_preliminary_and_replaced_expansions_agree(m, n, L):
    grid = make_grid(n, L)
    v0 = data.gaussian(grid, 0.5, 0.5)
    ph = PhaseFunction("bbm", m)
    ts = np.geomspace(4.0, 256.0, 7)
    for t in ts:
        exact = apply_semigroup(ph, t, v0)
        a = linear_expansion_integer_m(v0, 1, m, t)
        b = preliminary_expansion_with_K(v0, 1, m, t)
        assert lp_norm(a - b, 2) < min(residual_norm(exact, a, 2), residual_norm(exact, b, 2))
    for N in (1, 2):
        mom = moments(v0, N).values
        ratio = [lp_norm(linear_expansion_integer_m(v0, N, m, t) - preliminary_expansion_with_K(v0, N, m, t), 2)
                 / (np.max(np.abs(mom)) * t ** (-(1 + N) / m - 1 / (2 * m))) for t in ts]
        assert np.all(np.diff(ratio[2:]) < 0)
