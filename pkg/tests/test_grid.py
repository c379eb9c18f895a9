import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddlab.grid import (
    Field,
    Spectrum,
    apply_multiplier,
    forward,
    inverse,
    lp_norm,
    make_grid,
    plancherel_l2,
    tail_mass,
)


def test_make_grid_layout():
    g = make_grid(16, 4.0)
    assert g.dx == 0.5
    assert g.dxi == pytest.approx(math.pi / 4)
    assert g.x[0] == -4.0 and g.x[-1] == pytest.approx(3.5)
    assert g.k[g.nyquist] == -8
    assert g.xi_max == pytest.approx(2 * math.pi)


@pytest.mark.parametrize("n, L", [(15, 1.0), (24, 1.0), (8, 1.0), (16, 0.0), (16, -2.0), (16, float("inf"))])
def test_make_grid_rejects_bad_input(n, L):
    with pytest.raises(ValueError):
        make_grid(n, L)


def test_grid_arrays_are_read_only():
    g = make_grid(16, 1.0)
    with pytest.raises(ValueError):
        g.x[0] = 1.0


def test_field_validates_shape_and_finiteness():
    g = make_grid(16, 1.0)
    with pytest.raises(ValueError):
        Field(g, np.zeros(8))
    with pytest.raises(ValueError):
        Field(g, np.full(16, np.nan))


def test_field_arithmetic_requires_same_grid():
    a = Field(make_grid(16, 1.0), np.ones(16))
    b = Field(make_grid(16, 2.0), np.ones(16))
    with pytest.raises(ValueError):
        a + b
    assert np.array_equal((a + a).values, 2 * a.values)
    assert np.array_equal((2.0 * a - a).values, a.values)


def test_forward_of_cosine_matches_direct_sum():
    g = make_grid(64, math.pi)
    f = Field(g, np.cos(3 * g.x))
    c = forward(f).coeffs
    # direct evaluation of dx * sum_j exp(-i xi_k x_j) f(x_j)
    direct = g.dx * np.exp(-1j * np.outer(g.xi, g.x)) @ f.values
    assert np.max(np.abs(c - direct)) < 1e-12
    peaks = np.flatnonzero(np.abs(c) > 1e-9)
    assert sorted(g.k[peaks].tolist()) == [-3, 3]
    assert c[peaks] == pytest.approx([math.pi, math.pi])


def test_forward_of_gaussian_matches_continuous_transform():
    g = make_grid(512, 20.0)
    f = Field(g, np.exp(-g.x**2))
    exact = math.sqrt(math.pi) * np.exp(-g.xi**2 / 4)
    assert np.max(np.abs(forward(f).coeffs - exact)) < 1e-12


def test_round_trip_random_fields(rng):
    g = make_grid(256, 10.0)
    for _ in range(100):
        v = rng.standard_normal(g.n)
        back = inverse(forward(Field(g, v))).values
        assert np.linalg.norm(back - v) <= 1e-12 * np.linalg.norm(v)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=32, max_size=32))
def test_round_trip_property(vals):
    g = make_grid(32, 3.0)
    v = np.array(vals)
    back = inverse(forward(Field(g, v))).values
    assert np.allclose(back, v, rtol=0, atol=1e-12 * max(1.0, np.abs(v).max()))


def test_plancherel(rng):
    g = make_grid(256, 10.0)
    for _ in range(20):
        f = Field(g, rng.standard_normal(g.n))
        lhs = lp_norm(f, 2) ** 2
        assert abs(lhs - plancherel_l2(forward(f)) ** 2) <= 1e-10 * lhs


def test_apply_multiplier_identity_and_zero(rng):
    g = make_grid(64, 5.0)
    s = forward(Field(g, rng.standard_normal(g.n)))
    assert np.array_equal(apply_multiplier(s, 1.0).coeffs, s.coeffs)
    assert np.all(apply_multiplier(s, lambda xi: 0 * xi).coeffs == 0)


def test_apply_multiplier_derivative_of_sine():
    g = make_grid(128, math.pi)
    for k in (1, 4, 17):
        s = forward(Field(g, np.sin(k * g.x)))
        d = inverse(apply_multiplier(s, lambda xi: 1j * xi))
        assert np.max(np.abs(d.values - k * np.cos(k * g.x))) <= 1e-10


def test_apply_multiplier_linear(rng):
    g = make_grid(64, 5.0)
    s1 = forward(Field(g, rng.standard_normal(g.n)))
    s2 = forward(Field(g, rng.standard_normal(g.n)))
    sym = lambda xi: np.exp(-np.abs(xi)) + 1j * xi  # noqa: E731
    lhs = apply_multiplier(s1 + s2, sym).coeffs
    rhs = apply_multiplier(s1, sym).coeffs + apply_multiplier(s2, sym).coeffs
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_apply_multiplier_drops_odd_part_at_nyquist():
    g = make_grid(16, 1.0)
    s = Spectrum(g, np.ones(16))
    out = apply_multiplier(s, lambda xi: 1j * xi)
    assert out.coeffs[g.nyquist] == 0
    kept = apply_multiplier(s, lambda xi: 1j * xi, real_output=False)
    assert kept.coeffs[g.nyquist] != 0


def test_apply_multiplier_rejects_non_finite_symbol():
    g = make_grid(16, 1.0)
    s = Spectrum(g, np.ones(16))
    with np.errstate(divide="ignore"), pytest.raises(ValueError):
        apply_multiplier(s, lambda xi: 1.0 / xi)


def test_lp_norm_examples():
    g = make_grid(1024, 30.0)
    assert all(lp_norm(Field(g, np.zeros(g.n)), p) == 0 for p in (1, 2, 3.5, np.inf))
    plateau = Field(g, (np.abs(g.x) <= 1.0).astype(float))
    assert abs(lp_norm(plateau, 1) - 2.0) <= g.dx
    heat = Field(g, np.exp(-g.x**2 / 4) / math.sqrt(4 * math.pi))
    assert abs(lp_norm(heat, 1) - 1.0) <= 1e-10
    assert lp_norm(heat, np.inf) == pytest.approx(1 / math.sqrt(4 * math.pi))
    # L^p of exp(-x^2): (sqrt(pi/p))^(1/p)
    f = Field(g, np.exp(-g.x**2))
    assert lp_norm(f, 3) == pytest.approx((math.sqrt(math.pi / 3)) ** (1 / 3), rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(f, 0.5)


def test_tail_mass():
    g = make_grid(256, 10.0)
    assert tail_mass(Field(g, np.exp(-g.x**2))) < 1e-10
    assert tail_mass(Field(g, np.ones(g.n))) == pytest.approx(0.5, abs=0.01)
    assert tail_mass(Field(g, np.zeros(g.n))) == 0.0
