r"""Scalar special functions used by the kernels and operators.

Everything here is a pure function of its inputs.

* :func:`log_gamma` and :func:`gamma_ratio` -- Gamma quotients
  :math:`\Gamma(n+a)/\Gamma(n+b)` evaluated without forming either Gamma.
* :func:`bessel_i_scaled` -- :math:`e^{-t} I_k(t)` for integer order.
* :func:`heat_kernel` / :func:`heat_kernel_row` -- the semidiscrete heat
  kernel :math:`G(m,t) = e^{-2t} I_m(2t)` on the unit lattice.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit
from numpy.polynomial import polynomial as P
from scipy import integrate, special

__all__ = [
    "log_gamma",
    "gamma_ratio",
    "gamma_ratio_by_integral",
    "bessel_i_scaled",
    "bessel_row",
    "bessel_rows",
    "heat_kernel",
    "heat_kernel_row",
    "heat_kernel_radius",
    "hankel_coefficients",
]

# Bernoulli-number coefficients B_{2k}/(2k(2k-1)) of the Stirling series.
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
])
_STIRLING_SWITCH = 10.0


def log_gamma(x):
    """Natural logarithm of the Gamma function for positive arguments.

    Accepts a scalar or an array. Raises ``ValueError`` for non-positive or
    non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"log_gamma requires finite x > 0, got {x!r}")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return special.gammaln(arr)


def _stirling_tail(z):
    # sum_k B_2k / (2k(2k-1) z^(2k-1)), valid for z >= _STIRLING_SWITCH
    w = 1.0 / (z * z)
    acc = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        acc = acc * w + c
    return acc / z


def _log_gamma_ratio(x, a, b):
    """ln Gamma(x+a) - ln Gamma(x+b) for an array x, with x+a, x+b > 0."""
    za = x + a
    zb = x + b
    out = np.empty_like(x)
    big = np.minimum(za, zb) >= _STIRLING_SWITCH
    small = ~big
    if np.any(small):
        out[small] = special.gammaln(za[small]) - special.gammaln(zb[small])
    if np.any(big):
        z = zb[big]
        d = a - b
        # (z+d-1/2) ln(z+d) - (z-1/2) ln z - d, rearranged so nothing of size z ln z cancels
        main = (z - 0.5) * np.log1p(d / z) + d * np.log(z + d) - d
        out[big] = main + (_stirling_tail(z + d) - _stirling_tail(z))
    return out


def gamma_ratio(n, a: float, b: float):
    r"""Evaluate :math:`\Gamma(n+a)/\Gamma(n+b)`.

    Parameters
    ----------
    n : int or array_like
        Nonnegative integer(s); non-integer values are accepted as well.
    a, b : float
        Shifts, with ``n + a > 0`` and ``n + b > 0``.

    Returns
    -------
    float or ndarray
        The quotient, computed from a log-gamma difference that avoids the
        overflow of either Gamma factor. Large arguments use the difference
        of two Stirling series so the result keeps full relative precision.
    """
    narr = np.asarray(n, dtype=float)
    scalar = narr.ndim == 0
    x = np.atleast_1d(narr)
    if np.any(x + a <= 0) or np.any(x + b <= 0):
        raise ValueError("gamma_ratio requires n + a > 0 and n + b > 0")
    out = np.exp(_log_gamma_ratio(x, a, b))
    return float(out[0]) if scalar else out


def gamma_ratio_by_integral(z: float, a: float, b: float) -> float:
    r"""Quadrature value of :math:`\Gamma(z+a)/\Gamma(z+b)` for ``b > a``.

    Uses

    .. math::
        \frac{\Gamma(z+a)}{\Gamma(z+b)} = \frac{1}{\Gamma(b-a)}
        \int_0^\infty e^{-(z+a)v}(1-e^{-v})^{b-a-1}\,dv .

    Intended as an independent check of :func:`gamma_ratio`.
    """
    if b <= a or z + a <= 0:
        raise ValueError("integral representation needs b > a and z + a > 0")
    c = b - a - 1.0
    lam = z + a

    def smooth(v):
        # (1-e^{-v})^c = v^c * ((1-e^{-v})/v)^c; the v^c part goes to the weight
        q = -math.expm1(-v) / v if v > 0 else 1.0
        return math.exp(-lam * v) * q**c

    split = min(1.0, 30.0 / lam)
    head, _ = integrate.quad(smooth, 0.0, split, weight="alg", wvar=(c, 0.0),
                             epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda v: math.exp(-lam * v) * (-math.expm1(-v)) ** c,
                             split, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    return (head + tail) / math.gamma(b - a)


# ---------------------------------------------------------------------------
# Debye polynomials u_k(p), built once from the standard recursion
#   u_{k+1} = p^2 (1-p^2)/2 u_k' + 1/8 \int_0^p (1-5t^2) u_k(t) dt
# ---------------------------------------------------------------------------

def _debye_polynomials(order: int) -> np.ndarray:
    polys = [np.array([1.0])]
    for _ in range(order):
        u = polys[-1]
        t1 = P.polymul([0.0, 0.0, 0.5, 0.0, -0.5], P.polyder(u))
        t2 = P.polyint(P.polymul([1.0, 0.0, -5.0], u)) / 8.0
        polys.append(P.polyadd(t1, t2))
    width = max(len(p) for p in polys)
    out = np.zeros((len(polys), width))
    for i, p in enumerate(polys):
        out[i, : len(p)] = p
    return out


_DEBYE = _debye_polynomials(10)


@njit(cache=True)
def _series_scaled(k, x):
    # e^{-x} I_k(x) from the power series, k >= 0, x >= 0
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    q = 0.25 * x * x
    term = 1.0
    acc = 1.0
    j = 0
    while True:
        j += 1
        term *= q / (j * (k + j))
        acc += term
        if term < 1e-17 * acc:
            break
    logpref = -x + k * math.log(0.5 * x) - math.lgamma(k + 1.0)
    return math.exp(logpref) * acc


@njit(cache=True)
def _debye_scaled(k, x, coeffs):
    nu = float(k)
    z = x / nu
    root = math.sqrt(1.0 + z * z)
    p = 1.0 / root
    # nu*eta - x with eta = sqrt(1+z^2) + ln(z/(1+sqrt(1+z^2)))
    expo = nu * (root - z) + nu * math.log(z / (1.0 + root))
    acc = 0.0
    inv = 1.0
    for i in range(coeffs.shape[0]):
        c = 0.0
        for d in range(coeffs.shape[1] - 1, -1, -1):
            c = c * p + coeffs[i, d]
        acc += c * inv
        inv /= nu
    return math.exp(expo) * acc / (math.sqrt(2.0 * math.pi * nu) * math.sqrt(root))


@njit(cache=True)
def _miller_start(kmax, x):
    return kmax + int(math.ceil(9.5 * math.sqrt(x))) + 30


@njit(cache=True)
def _miller_row(x, kmax, out):
    # Backward recurrence I_{k-1} = (2k/x) I_k + I_{k+1}, normalised by
    # I_0 + 2 sum_{k>=1} I_k = e^x.
    n = _miller_start(kmax, x)
    f_next = 0.0
    f = 1e-280
    total = 0.0
    for i in range(kmax + 1):
        out[i] = 0.0
    for k in range(n, 0, -1):
        if k <= kmax:
            out[k] = f
        total += 2.0 * f
        f_prev = (2.0 * k / x) * f + f_next
        f_next = f
        f = f_prev
        if f > 1e250:
            f *= 1e-250
            f_next *= 1e-250
            total *= 1e-250
            for i in range(k, kmax + 1):
                out[i] *= 1e-250
    out[0] = f
    total += f
    for i in range(kmax + 1):
        out[i] /= total


@njit(cache=True)
def _row_scaled(x, kmax, out):
    if x == 0.0:
        for i in range(kmax + 1):
            out[i] = 0.0
        out[0] = 1.0
    elif x < 1.0:
        for i in range(kmax + 1):
            out[i] = _series_scaled(i, x)
    else:
        _miller_row(x, kmax, out)


@njit(cache=True)
def _bessel_scalar(k, x, coeffs):
    k = abs(k)
    if x <= max(12.0, 0.5 * k):
        return _series_scaled(k, x)
    if k <= 1.5 * x + 30.0:
        buf = np.empty(k + 1)
        _miller_row(x, k, buf)
        return buf[k]
    return _debye_scaled(k, x, coeffs)


@njit(cache=True)
def _rows_scaled(xs, kmax):
    out = np.empty((xs.shape[0], kmax + 1))
    for i in range(xs.shape[0]):
        _row_scaled(xs[i], kmax, out[i])
    return out


def bessel_i_scaled(k: int, t: float) -> float:
    r"""Exponentially scaled modified Bessel function :math:`e^{-t} I_{|k|}(t)`.

    The evaluation route depends on the regime: the power series when
    ``t <= max(12, |k|/2)``, a normalised backward recurrence when
    ``|k| <= 1.5 t + 30``, and the Debye uniform expansion otherwise.
    """
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"bessel_i_scaled requires finite t >= 0, got {t!r}")
    return float(_bessel_scalar(int(k), t, _DEBYE))


def bessel_row(x: float, kmax: int) -> np.ndarray:
    """All orders ``0..kmax`` of ``e^{-x} I_k(x)`` at one argument."""
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"bessel_row requires finite x >= 0, got {x!r}")
    out = np.empty(int(kmax) + 1)
    _row_scaled(x, int(kmax), out)
    return out


def bessel_rows(xs, kmax: int) -> np.ndarray:
    """Rows of :func:`bessel_row` for every argument in ``xs``; shape ``(len(xs), kmax+1)``."""
    xs = np.ascontiguousarray(xs, dtype=float)
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ValueError("bessel_rows requires finite nonnegative arguments")
    return _rows_scaled(xs, int(kmax))


def heat_kernel(m: int, t: float) -> float:
    """Semidiscrete heat kernel ``G(m, t) = exp(-2t) I_m(2t)`` on the unit lattice."""
    return bessel_i_scaled(m, 2.0 * t)


def heat_kernel_radius(t: float, tol: float = 1e-14) -> int:
    """Radius ``M`` such that ``sum_{|m|>M} G(m, t)`` is below ``tol``.

    The bound uses the Gaussian decay ``exp(-m^2/(4t))`` of the kernel; the
    default tolerance matches the truncation used by the operators.
    """
    x = 2.0 * float(t)
    width = math.sqrt(2.0 * max(math.log(1.0 / tol), 1.0) + 8.0)
    return int(math.ceil(width * math.sqrt(x) + 12.0))


def heat_kernel_row(t: float, radius: int | None = None) -> np.ndarray:
    """``G(m, t)`` for ``m = 0..radius`` (default radius from :func:`heat_kernel_radius`)."""
    if radius is None:
        radius = heat_kernel_radius(t)
    return bessel_row(2.0 * float(t), int(radius))


def hankel_coefficients(m, order: int) -> np.ndarray:
    r"""Coefficients :math:`a_j(m)` of the large-argument expansion

    .. math::
        e^{-x} I_m(x) \sim (2\pi x)^{-1/2} \sum_{j\ge0} (-1)^j a_j(m) x^{-j},

    returned with shape ``(order+1, len(m))``.
    """
    m = np.atleast_1d(np.asarray(m, dtype=float))
    mu = 4.0 * m * m
    out = np.empty((order + 1, m.size))
    out[0] = 1.0
    for j in range(1, order + 1):
        out[j] = out[j - 1] * (mu - (2 * j - 1) ** 2) / (j * 8.0)
    return out
