import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdlap.continuum import corpus_by_id, restrict
from fdlap.grid import GridFunction
from fdlap.kernels import NEGATIVE, build_table, constant_A, exact_tail_mass, kernel_sum, kernel_value
from fdlap.operators import (bilinear_form, discrete_derivative, discrete_laplacian, frac_integral, frac_laplacian,
                             frac_laplacian_by_semigroup, heat_semigroup, holder_seminorm, multiplier_oracle,
                             sobolev_poincare_check)


def _random(n, seed, h=1.0, lo=None):
    rng = np.random.default_rng(seed)
    return GridFunction(h, -(n // 2) if lo is None else lo, rng.uniform(-1.0, 1.0, n))


def _delta(h=1.0):
    return GridFunction(h, 0, np.array([1.0]))


# -- discrete Laplacian -----------------------------------------------------

def test_discrete_laplacian_stencil_and_scaling():
    d = discrete_laplacian(_delta())
    assert (d.lo, d.values.tolist()) == (-1, [-1.0, 2.0, -1.0])
    c = discrete_laplacian(GridFunction(1.0, 0, np.ones(20)))
    assert np.all(c.values[2:-2] == 0.0)
    u = _random(10, 0)
    assert np.allclose(discrete_laplacian(GridFunction(0.5, u.lo, u.values)).values,
                       4.0 * discrete_laplacian(u).values)


# -- pointwise formula ------------------------------------------------------

def test_delta_gives_kernel_values():
    out = frac_laplacian(_delta(), 0.5, window=(-5, 5))
    assert out.at(0)[()] == pytest.approx(4.0 / math.pi, rel=1e-15)
    assert out.at(2)[()] == pytest.approx(-4.0 / (15.0 * math.pi), rel=1e-14)
    out = frac_laplacian(_delta(0.25), 0.3, window=(-5, 5))
    assert out.at(-4)[()] == pytest.approx(-kernel_value(0.3, 0.25, 4), rel=1e-14)


def test_fft_and_direct_paths_agree():
    u = _random(1000, 3, h=0.01)
    a = frac_laplacian(u, 0.35, method="fft")
    b = frac_laplacian(u, 0.35, method="direct")
    assert np.max(np.abs(a.values - b.values)) <= 1e-12 * np.max(np.abs(b.values))


@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_constants_are_annihilated(s):
    table = build_table(s, 1.0, radius=4096)
    W = 200_000
    c = GridFunction(1.0, -W, np.full(2 * W + 1, 3.0))
    out = frac_laplacian(c, s, table, window=(0, 0))
    # only the kernel mass beyond the data window survives
    assert out.values[0] == pytest.approx(3.0 * exact_tail_mass(s, 1.0, W), rel=1e-9)
    assert abs(out.values[0]) <= 3.0 * table.tail_bound(W)


def test_table_mismatch_is_rejected():
    with pytest.raises(ValueError):
        frac_laplacian(_delta(0.5), 0.3, build_table(0.3, 1.0, radius=10))
    with pytest.raises(ValueError):
        frac_laplacian(_delta(), 0.3, build_table(0.2, 1.0, NEGATIVE, radius=10))


# -- triple oracle ----------------------------------------------------------

@pytest.mark.parametrize("s", [0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9])
def test_semigroup_oracle(s):
    u = _random(40, int(10 * s), h=0.5)
    w = (u.lo - 30, u.hi + 30)
    a = frac_laplacian(u, s, window=w)
    b = frac_laplacian_by_semigroup(u, s, window=w)
    assert np.max(np.abs(a.values - b.values)) < 1e-7


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_multiplier_oracle(s):
    u = _random(64, 7, h=0.125)
    w = (u.lo - 40, u.hi + 40)
    a = frac_laplacian(u, s, window=w)
    b = multiplier_oracle(u, s, window=w)
    assert np.max(np.abs(a.values - b.values)) < 1e-9 * max(1.0, np.max(np.abs(a.values)))


def test_semigroup_delta_and_linearity():
    s = 0.4
    assert frac_laplacian_by_semigroup(_delta(), s, window=(0, 0)).values[0] == pytest.approx(kernel_sum(s), abs=1e-7)
    u, v = _random(12, 1), _random(12, 2)
    w = (-20, 20)
    lhs = frac_laplacian_by_semigroup(u + 2.0 * v, s, window=w).values
    rhs = frac_laplacian_by_semigroup(u, s, window=w).values + 2.0 * frac_laplacian_by_semigroup(v, s, window=w).values
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_multiplier_at_one_is_the_discrete_laplacian():
    u = _random(30, 5, h=0.5)
    lap = discrete_laplacian(u)
    m = multiplier_oracle(u, 1.0, window=(lap.lo, lap.hi))
    assert np.max(np.abs(m.values - lap.values)) < 1e-10


@given(st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]), st.sampled_from([1.0, 0.5, 0.1]), st.integers(0, 10_000))
@settings(max_examples=20, deadline=None)
def test_l2_operator_bound(s, h, seed):
    u = _random(30, seed, h=h)
    table = build_table(s, h, radius=20_000)
    out = frac_laplacian(u, s, table)
    assert out.norm(2) <= 4**s / h ** (2 * s) * u.norm(2)


# -- limits in s ------------------------------------------------------------

def test_limit_s_to_zero_and_one():
    u = _random(6, 11)
    w = (-400, 400)
    ref = u.on_window(*w).values
    low = [np.max(np.abs(frac_laplacian(u, s, window=w).values - ref)) for s in (0.1, 0.05, 0.01)]
    assert low[0] > low[1] > low[2] and low[2] < 0.05
    lap = discrete_laplacian(u).on_window(*w).values
    high = [np.max(np.abs(frac_laplacian(u, s, window=w).values - lap)) for s in (0.9, 0.95, 0.99)]
    assert high[0] > high[1] > high[2] and high[2] < 0.05


# -- negative power ---------------------------------------------------------

def test_frac_integral_of_delta_and_domain():
    out = frac_integral(_delta(0.5), 0.2, window=(-3, 3))
    assert np.allclose(out.values, kernel_value(0.2, 0.5, np.arange(-3, 4), NEGATIVE), rtol=1e-15)
    with pytest.raises(ValueError):
        frac_integral(_delta(), 0.5)


def test_composition_recovers_f():
    s, h = 0.2, 1.0
    f = _random(16, 4)
    W = 2**20
    F = frac_integral(f, s, window=(-W, W))
    back = frac_laplacian(F, s, window=(f.lo, f.hi))
    # truncation beyond W leaves about 2 A_s A_{-s} sum(f) / W
    budget = 2 * constant_A(s) * constant_A(s, NEGATIVE) * np.abs(f.values).sum() / W
    assert budget < 1e-6
    assert np.max(np.abs(back.values - f.values)) < 1e-6


# -- heat semigroup ---------------------------------------------------------

def test_heat_semigroup():
    u = _random(25, 6, h=0.2)
    assert heat_semigroup(u, 0.0) is u
    for t in (0.01, 1.0, 30.0):
        v = heat_semigroup(u, t)
        assert v.h * v.values.sum() == pytest.approx(u.h * u.values.sum(), abs=1e-12)
    one = heat_semigroup(GridFunction(0.2, -2000, np.ones(4001)), 2.0)
    assert one.at(0)[()] == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(ValueError):
        heat_semigroup(u, -1.0)


# -- derivatives ------------------------------------------------------------

def test_discrete_derivatives():
    h = 0.25
    j = np.arange(-10, 11)
    lin = GridFunction(h, -10, h * j)
    assert np.allclose(discrete_derivative(lin).values[1:-1], 1.0)
    u = _random(15, 8, h=h)
    dp, dm = discrete_derivative(u, "plus"), discrete_derivative(u, "minus")
    k = np.arange(-30, 30)
    assert np.array_equal(dm.at(k), dp.at(k - 1))
    with pytest.raises(ValueError):
        discrete_derivative(u, "sideways")


@pytest.mark.parametrize("s", [0.2, 0.7])
def test_derivative_commutes_with_the_operator(s):
    u = _random(50, 9, h=0.1)
    w = (-80, 80)
    lhs = discrete_derivative(frac_laplacian(u, s, window=(w[0] - 1, w[1] + 1)), "plus").on_window(*w)
    rhs = frac_laplacian(discrete_derivative(u, "plus"), s, window=w)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10 * max(1.0, np.max(np.abs(rhs.values)))


# -- Hölder seminorms -------------------------------------------------------

def test_holder_seminorm_examples():
    h = 0.01
    x = h * np.arange(-100, 101)
    assert holder_seminorm(GridFunction(h, -100, np.abs(x)), 0, 1.0).value == pytest.approx(1.0, rel=1e-12)
    assert holder_seminorm(GridFunction(h, -100, np.full(201, 4.0)), 1, 0.5).value == 0.0
    sq = holder_seminorm(GridFunction(h, -100, np.sqrt(np.abs(x))), 0, 0.5)
    assert sq.value == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        holder_seminorm(GridFunction(h, 0, x), 0, 0.0)


def test_holder_seminorm_sums_the_difference_compositions():
    h = 0.1
    x = h * np.arange(0, 50)
    # x^2 / 2 has D_+ u_j = h(j + 1/2), Lipschitz constant 1, counted for (1,0) and (0,1)
    assert holder_seminorm(GridFunction(h, 0, 0.5 * x**2), 1, 1.0).value == pytest.approx(2.0, rel=1e-12)


def test_sampled_seminorm_grows_under_refinement():
    # a coarse sample is a subset of the nested fine one, so its supremum is smaller
    U = corpus_by_id("holder_0.6")
    vals = [holder_seminorm(restrict(U, 2.0**-e, (-3 * 2 ** (e - 1), 3 * 2 ** (e - 1))), 0, 0.6).value
            for e in (3, 5, 7)]
    assert vals[0] <= vals[1] <= vals[2] < 2.0


def test_holder_mapping_ratios_are_bounded():
    s, alpha = 0.1, 0.6
    U = corpus_by_id("holder_0.6")
    ratios = []
    for e in range(3, 9):
        h = 2.0**-e
        u = restrict(U, h, (-(2**e), 2**e))
        n = len(u)
        out = frac_laplacian(u, s, window=(u.lo - n // 2, u.hi + n // 2))
        ratios.append(holder_seminorm(out, 0, alpha - 2 * s).value / holder_seminorm(u, 0, alpha).value)
    assert max(ratios) <= 10 * float(np.median(ratios))


def test_schauder_ratio_for_the_negative_power():
    s = 0.2
    ratios = []
    rng = np.random.default_rng(12)
    for e in range(3, 9):
        h = 2.0**-e
        n = int(round(1 / h))
        f = GridFunction(h, -n, rng.uniform(-1.0, 1.0, 2 * n + 1))
        F = frac_integral(f, s, window=(-2 * n, 2 * n))
        ratios.append(holder_seminorm(F, 0, 2 * s).value / f.norm(np.inf))
    assert max(ratios) <= 10 * float(np.median(ratios))


# -- energy form and inequalities -------------------------------------------

@pytest.mark.parametrize("s", [0.15, 0.5, 0.85])
def test_energy_identity_symmetry_and_positivity(s):
    h = 0.2
    u = _random(40, 13, h=h)
    v = _random(25, 14, h=h, lo=-5)
    a = bilinear_form(u, v, s)
    table = build_table(s, h, radius=50)
    lu = frac_laplacian(u, s, table, window=(v.lo, v.hi))
    assert a == pytest.approx(h * np.dot(lu.values, v.values), rel=1e-9, abs=1e-12)
    assert a == pytest.approx(bilinear_form(v, u, s), rel=1e-13)
    assert bilinear_form(u, u, s) > 0
    assert bilinear_form(GridFunction(h, 0, np.zeros(5)), GridFunction(h, 0, np.zeros(5)), s) == 0.0


def test_sobolev_poincare_delta_and_zero():
    s = 0.3
    r = sobolev_poincare_check(_delta(), s)
    assert r.sobolev_lhs == pytest.approx(1.0) and r.poincare_lhs == pytest.approx(1.0)
    assert r.energy == pytest.approx(math.sqrt(kernel_sum(s)), rel=1e-13)
    assert r.poincare_factor == 1.0
    z = sobolev_poincare_check(GridFunction(1.0, 0, np.zeros(3)), s)
    assert (z.sobolev_lhs, z.energy, z.sobolev_ratio, z.poincare_ratio) == (0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        sobolev_poincare_check(_delta(), 0.6)


def test_poincare_ratio_invariant_under_mesh_change():
    s = 0.25
    u = _random(30, 15, h=1.0)
    a = sobolev_poincare_check(u, s).poincare_ratio
    b = sobolev_poincare_check(GridFunction(0.5, u.lo, u.values), s).poincare_ratio
    assert b == pytest.approx(a, rel=1e-12)
