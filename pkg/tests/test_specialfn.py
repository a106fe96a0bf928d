import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from fdlap.specialfn import (bessel_i_scaled, bessel_row, bessel_rows, gamma_ratio, gamma_ratio_by_integral,
                             hankel_coefficients, heat_kernel, heat_kernel_radius, heat_kernel_row, log_gamma)

mpmath.mp.dps = 40


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (0.5, 0.5723649429247001), (10.0, 12.801827480081469)])
def test_log_gamma_known_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, rel=1e-14, abs=1e-15)


def test_log_gamma_matches_mpmath_on_a_wide_range():
    xs = np.geomspace(1e-3, 1e6, 60)
    for x in xs:
        assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-14)


def test_gamma_ratio_half_integers():
    assert gamma_ratio(1, -0.5, 1.5) == pytest.approx(4.0 / 3.0, rel=1e-15)


@pytest.mark.parametrize("n", [1, 7, 1000, 10**6])
@pytest.mark.parametrize("a, b", [(-0.3, 1.3), (-0.8, 1.8), (0.2, 0.8), (-0.05, 1.05)])
def test_gamma_ratio_against_mpmath_without_overflow(n, a, b):
    ref = mpmath.gamma(n + a) / mpmath.gamma(n + b)
    assert gamma_ratio(n, a, b) == pytest.approx(float(ref), rel=1e-13)


def test_gamma_ratio_vectorised_and_decreasing():
    n = np.arange(1, 5000)
    r = gamma_ratio(n, -0.3, 1.3)
    assert r.shape == n.shape
    assert np.all(np.diff(r) < 0)


def test_gamma_ratio_by_integral_is_an_independent_oracle():
    assert gamma_ratio_by_integral(50, -0.3, 1.3) == pytest.approx(gamma_ratio(50, -0.3, 1.3), rel=1e-10)


@pytest.mark.parametrize("s", [0.1, 0.3, 0.7, 0.9])
def test_gamma_ratio_asymptotics_and_lower_bound(s):
    n = np.unique(np.geomspace(1, 1e5, 400).astype(int))
    r = gamma_ratio(n, -s, 1.0 + s)
    scaled = r * n ** (1.0 + 2.0 * s)
    assert np.all(np.isfinite(scaled)) and scaled.min() > 0 and scaled.max() < 10
    # |ratio - n^{-(1+2s)}| n^{2+2s} stays bounded
    c = np.abs(r - n ** (-(1.0 + 2.0 * s))) * n ** (2.0 + 2.0 * s)
    assert c.max() < 10
    assert np.all(r >= (2.0 * n) ** (-(1.0 + 2.0 * s)))


def test_bessel_endpoints():
    assert bessel_i_scaled(0, 0.0) == 1.0
    assert bessel_i_scaled(3, 0.0) == 0.0
    v = bessel_i_scaled(0, 50.0)
    assert 0.99 < v * math.sqrt(2 * math.pi * 50) < 1.01


@pytest.mark.parametrize("t", [1e-3, 0.7, 6.0, 12.0, 24.0, 80.0, 500.0, 5e4])
def test_bessel_row_matches_scipy(t):
    row = bessel_row(t, 200)
    ref = special.ive(np.arange(201), t)
    mask = ref > 1e-290
    assert np.allclose(row[mask], ref[mask], rtol=1e-12, atol=0)


def test_bessel_large_order_against_mpmath():
    for k, t in [(400, 20.0), (90, 3.0), (1000, 600.0)]:
        ref = mpmath.besseli(k, t) * mpmath.exp(-t)
        assert bessel_i_scaled(k, t) == pytest.approx(float(ref), rel=1e-11)


@given(st.integers(0, 300), st.floats(0.0, 2000.0))
@settings(max_examples=60, deadline=None)
def test_bessel_is_even_in_the_order_and_nonnegative(k, t):
    assert bessel_i_scaled(k, t) == bessel_i_scaled(-k, t)
    assert bessel_i_scaled(k, t) >= 0.0


def test_bessel_rows_stack_rows():
    xs = np.array([0.5, 3.0, 40.0])
    rows = bessel_rows(xs, 30)
    for i, x in enumerate(xs):
        assert np.allclose(rows[i], bessel_row(x, 30), rtol=1e-15)


def test_heat_kernel_initial_condition():
    assert heat_kernel(0, 0.0) == 1.0
    assert heat_kernel(2, 0.0) == 0.0


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0, 1000.0])
def test_heat_kernel_mass_is_one(t):
    row = heat_kernel_row(t)
    total = row[0] + 2.0 * row[1:].sum()
    assert total == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(row) <= 0)


def test_heat_kernel_radius_tail():
    t = 5.0
    M = heat_kernel_radius(t, 1e-13)
    row = heat_kernel_row(t, M + 400)
    assert 2.0 * row[M + 1 :].sum() < 1e-13


def test_heat_kernel_small_example():
    g1, g0 = heat_kernel(1, 0.5), heat_kernel(0, 0.5)
    assert 0 < g1 < g0
    assert g1 == pytest.approx(math.exp(-1.0) * special.iv(1, 1.0), rel=1e-14)


def test_hankel_coefficients_reproduce_the_asymptotic_series():
    # e^{-x} I_m(x) ~ (2 pi x)^{-1/2} sum_j (-1)^j a_j(m) / x^j
    m, x = 3.0, 400.0
    a = hankel_coefficients(np.array([m]), 8)[:, 0]
    approx = sum((-1) ** j * a[j] / x**j for j in range(9)) / math.sqrt(2 * math.pi * x)
    assert approx == pytest.approx(special.ive(m, x), rel=1e-14)
