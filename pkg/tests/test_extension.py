import math

import numpy as np
import pytest
from scipy import integrate

from fdlap.extension import (dirichlet_to_neumann, extension_constant, extension_dirichlet, extension_neumann,
                             neumann_to_dirichlet, richardson_limit)
from fdlap.grid import GridFunction
from fdlap.operators import frac_integral, frac_laplacian


def _delta(h=1.0):
    return GridFunction(h, 0, np.array([1.0]))


def test_extension_constant():
    assert extension_constant(0.5) == pytest.approx(1.0, rel=1e-15)
    s = 0.3
    assert extension_constant(s) == pytest.approx(math.gamma(0.7) / (4**-0.2 * math.gamma(0.3)), rel=1e-15)


@pytest.mark.parametrize("s", [0.2, 0.6])
def test_poisson_kernel_in_time_has_unit_mass(s):
    y = 0.7
    f = lambda t: y ** (2 * s) * math.exp(-y * y / (4 * t)) / (4**s * math.gamma(s) * t ** (1 + s))
    mass = integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, np.inf)[0]
    assert mass == pytest.approx(1.0, rel=1e-9)


def test_constant_data_extends_to_one():
    s, W = 0.7, 1000
    one = GridFunction(1.0, -W, np.ones(2 * W + 1))
    sl = extension_dirichlet(one, s, [0.25, 1.0], window=(-2, 2))
    # the Poisson mass outside the data window is of order (y/W)^{2s}
    assert np.max(np.abs(sl.values - 1.0)) < 1e-4


def test_extension_is_linear_and_reaches_the_data():
    s = 0.35
    rng = np.random.default_rng(0)
    u = GridFunction(0.5, -5, rng.uniform(-1, 1, 11))
    v = GridFunction(0.5, -5, rng.uniform(-1, 1, 11))
    y = [1e-3, 0.1, 1.0]
    a = extension_dirichlet(u + 3.0 * v, s, y).values
    b = extension_dirichlet(u, s, y).values + 3.0 * extension_dirichlet(v, s, y).values
    assert np.allclose(a, b, rtol=0, atol=1e-12)
    sl = extension_dirichlet(u, s, [1e-6])
    assert np.max(np.abs(sl.values[0] - u.on_window(sl.offset, sl.offset + sl.values.shape[1] - 1).values)) < 1e-3
    with pytest.raises(ValueError):
        extension_dirichlet(u, s, [0.0])
    with pytest.raises(ValueError):
        extension_neumann(u, 0.5, [1.0])


@pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
def test_dirichlet_to_neumann(s):
    for u in (_delta(), GridFunction(0.5, -3, np.array([0.3, -1.0, 2.0, 0.5, 0.0, 1.0, -0.2]))):
        dtn, err = dirichlet_to_neumann(u, s)
        ref = extension_constant(s) * frac_laplacian(u, s, window=(dtn.lo, dtn.hi)).values
        assert np.max(np.abs(dtn.values - ref)) < 1e-4 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("s", [0.1, 0.2, 0.4])
def test_neumann_to_dirichlet(s):
    ntd, err = neumann_to_dirichlet(_delta(), s)
    ref = frac_integral(_delta(), s, window=(ntd.lo, ntd.hi)).values / extension_constant(s)
    assert np.max(np.abs(ntd.values - ref)) < 1e-5


def test_neumann_trace_decays_monotonically_in_height():
    sl = extension_neumann(_delta(), 0.2, np.geomspace(0.01, 100, 30), window=(0, 0))
    v0 = np.abs(sl.values[:, 0])
    assert np.all(np.diff(v0) < 0)


def test_dirichlet_and_neumann_extensions_coincide():
    # (-Delta_h)^s u = f / kappa  implies  w = v; u is cut at |j| = W
    s = 0.2
    f = GridFunction(1.0, -1, np.array([0.5, 1.0, -0.25]))
    kappa = extension_constant(s)
    y = [0.5, 2.0]
    v = extension_neumann(f, s, y, window=(-3, 3)).values
    gaps = []
    for W in (1000, 4000):
        u = frac_integral(f, s, window=(-W, W)) * (1.0 / kappa)
        w = extension_dirichlet(u, s, y, window=(-3, 3)).values
        gaps.append(np.max(np.abs(w - v)) / np.max(np.abs(v)))
    assert gaps[1] < 1e-4
    # the remaining gap is the O(1/W) truncation of u
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)


def test_richardson_limit_recovers_a_polynomial_model():
    y = 0.5 ** np.arange(6)
    ex = [0.6, 2.0, 2.6]
    F = 3.0 + 2.0 * y**0.6 - y**2 + 0.5 * y**2.6
    lim, err = richardson_limit(y, F[:, None], ex)
    assert lim[0] == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(ValueError):
        richardson_limit(y[:2], F[:2, None], ex)
