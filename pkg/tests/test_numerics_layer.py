import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.linalg import toeplitz

from fdlap.grid import GridFunction, read_grid_csv
from fdlap.quadrature import head_weights, lattice_laplacian_powers, panel_rule, tau_moments
from fdlap.toeplitz import SymmetricToeplitz, symmetric_convolve


# -- grid functions ---------------------------------------------------------

def test_grid_geometry_and_norms():
    u = GridFunction(0.5, -2, np.array([0.0, 1.0, -2.0, 0.0, 3.0]))
    assert (u.lo, u.hi) == (-2, 2)
    assert np.allclose(u.x, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert u.support() == (-1, 2)
    assert u.support_count() == 3
    assert u.norm(np.inf) == 3.0
    assert u.norm(2) == pytest.approx(math.sqrt(0.5 * 14.0))
    assert u.norm(1) == pytest.approx(3.0)
    assert np.allclose(u.on_window(-4, 0).values, [0, 0, 0, 1, -2])
    assert np.allclose(u.at([-5, 0, 2, 9]), [0, -2, 3, 0])


def test_grid_algebra_aligns_windows():
    a = GridFunction(1.0, 0, np.array([1.0, 2.0]))
    b = GridFunction(1.0, 3, np.array([5.0]))
    c = a + 2.0 * b - a
    assert c.at([0, 1, 2, 3]).tolist() == [0.0, 0.0, 0.0, 10.0]
    with pytest.raises(ValueError):
        a + GridFunction(0.5, 0, np.array([1.0]))


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        GridFunction(0.0, 0, np.array([1.0]))
    with pytest.raises(ValueError):
        GridFunction(1.0, 0, np.array([np.nan]))


def test_grid_csv_round_trip(tmp_path):
    u = GridFunction(0.125, -3, np.array([0.1, -0.25, 1.0 / 3.0]))
    path = tmp_path / "u.csv"
    u.to_csv(path)
    v = read_grid_csv(path)
    assert v.h == u.h and v.lo == u.lo and np.array_equal(v.values, u.values)
    assert read_grid_csv(u.to_csv()).values.tolist() == u.values.tolist()


# -- Toeplitz products ------------------------------------------------------

@given(st.integers(1, 600), st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_fft_and_direct_convolution_agree(n, seed):
    rng = np.random.default_rng(seed)
    kern = 1.0 / (1.0 + np.arange(3 * n + 5)) ** 1.4
    u = rng.normal(size=n)
    d = symmetric_convolve(kern, u, 0, -n, 3 * n, "direct")
    f = symmetric_convolve(kern, u, 0, -n, 3 * n, "fft")
    assert np.max(np.abs(d - f)) <= 1e-12 * max(1.0, np.max(np.abs(d)))


def test_symmetric_toeplitz_matches_dense():
    rng = np.random.default_rng(1)
    for n in (5, 300, 2048):
        col = rng.normal(size=n)
        T = SymmetricToeplitz(col)
        x = rng.normal(size=n)
        ref = toeplitz(col) @ x
        assert np.allclose(T.matvec(x, "fft"), ref, rtol=0, atol=1e-12 * np.abs(ref).max() * 10)
        assert np.allclose(T.matvec(x, "direct"), ref, rtol=0, atol=1e-12 * np.abs(ref).max() * 10)
    assert np.array_equal(SymmetricToeplitz(np.arange(4.0)).dense(), toeplitz(np.arange(4.0)))


# -- tau quadrature ---------------------------------------------------------

def test_panel_rule_integrates_powers():
    x, w = panel_rule(1.0, 1e4, 2.0)
    assert np.sum(w * x**-1.5) == pytest.approx(2.0 * (1.0 - 1e4**-0.5), rel=1e-14)


def test_head_weights_closed_form_and_exponential():
    w = head_weights(0.3, 4)
    assert np.allclose(w, [1.0 / ((k + 0.3) * math.factorial(k)) for k in range(5)], rtol=1e-15)
    c = 0.8
    wc = head_weights(0.4, 3, c)
    for k in range(4):
        ref, _ = integrate.quad(lambda t: math.exp(-c / t) * t ** (k + 0.4 - 1), 0, 1, epsabs=0, epsrel=1e-13)
        assert wc[k] == pytest.approx(ref / math.factorial(k), rel=1e-12)
    with pytest.raises(ValueError):
        head_weights(-1.0, 2)


def _mp_moment(p, d, c):
    # full integral from Gamma(p) K_{-p}(d), minus the head on [0, 1], plus a
    # fast-decaying correction for the exp(-c/t) factor
    with mpmath.workdps(30):
        G = lambda t: mpmath.besseli(d, 2 * t) * mpmath.exp(-2 * t)
        a = 4 ** -p * mpmath.gamma(0.5 - p) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(p))
        full = mpmath.gamma(p) * a * mpmath.gamma(d + p) / mpmath.gamma(d + 1 - p)
        # t = u^{1/p} removes the endpoint singularity
        head = mpmath.quad(lambda u: G(u ** (1 / mpmath.mpf(p))), [0, 1]) / p
        corr = mpmath.quad(lambda t: mpmath.expm1(-c / t) * G(t) * t ** (p - 1),
                           [1, 10, 100, 1e3, 1e4, 1e6, mpmath.inf]) if c else 0
        return float(full - head + corr)


@pytest.mark.parametrize("p, c", [(0.05, 0.0), (0.2, 0.0), (0.3, 2.0), (0.45, 0.5)])
def test_tau_moments_against_mpmath(p, c):
    d = np.array([0, 1, 5, 20])
    got = tau_moments(p, d, c, tol=1e-12)
    for i, dd in enumerate(d):
        assert got[i] == pytest.approx(_mp_moment(p, int(dd), c), rel=1e-11)
    with pytest.raises(ValueError):
        tau_moments(0.5, [0])


def test_lattice_laplacian_powers():
    v = np.array([1.0, -2.0, 0.5])
    P = lattice_laplacian_powers(v, 3)
    assert P.shape == (4, 9)
    assert np.allclose(P[0, 3:6], v)
    lap = np.convolve(np.pad(v, 3), [1.0, -2.0, 1.0], mode="same")
    assert np.allclose(P[1], lap)
    assert P.sum(axis=1)[1:] == pytest.approx(np.zeros(3), abs=1e-12)
