r"""Quadrature in the unit-lattice heat time :math:`\tau = t/h^2`.

Every semigroup formula in the package reduces to moments

.. math::
    g_d = \int_1^\infty e^{-c/\tau}\, G(d,\tau)\, \tau^{p-1}\, d\tau,
    \qquad d = 0, 1, \dots,

plus a head on :math:`[0,1]` handled by the caller. The body uses
Gauss--Legendre panels of geometric length; beyond a cutoff the
large-argument expansion of :math:`I_d` is integrated in closed form.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .specialfn import bessel_rows, hankel_coefficients

__all__ = ["QuadratureError", "panel_rule", "tau_moments", "head_weights", "lattice_laplacian_powers"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_HANKEL_TERMS = 10


class QuadratureError(RuntimeError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


def panel_rule(r1: float, r2: float, ratio: float):
    """Composite 32-point Gauss--Legendre rule on ``[r1, r2]`` with panels growing by ``ratio``."""
    edges = [r1]
    while edges[-1] < r2:
        edges.append(min(edges[-1] * ratio, r2))
    edges = np.asarray(edges)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _power_tail(q: float, c: float, R: float) -> float:
    # int_R^inf exp(-c/tau) tau^{q-1} dtau for q < 0, by expanding the exponential
    acc = 0.0
    term = 1.0
    for n in range(200):
        piece = term * R ** (q - n) / (n - q)
        acc += piece
        if abs(piece) <= 1e-18 * abs(acc):
            break
        term *= -c / (n + 1)
    return acc


def _hankel_tail(d: np.ndarray, p: float, R: float, c: float) -> np.ndarray:
    a = hankel_coefficients(d, _HANKEL_TERMS)
    out = np.zeros(d.size)
    for j in range(_HANKEL_TERMS + 1):
        out += (-1.0) ** j * a[j] * 2.0 ** (-j) * _power_tail(p - 0.5 - j, c, R)
    return out / math.sqrt(4.0 * math.pi)


def tau_moments(p: float, d, c: float = 0.0, tol: float = 1e-10) -> np.ndarray:
    r"""Moments :math:`\int_1^\infty e^{-c/\tau}G(d,\tau)\tau^{p-1}d\tau` for ``p < 1/2``.

    The panel ratio is halved (2, 2^{1/2}, 2^{1/4}) until two successive
    levels agree to ``tol`` in the max-relative sense.
    """
    d = np.atleast_1d(np.abs(np.asarray(d, dtype=int)))
    if p >= 0.5:
        raise ValueError("moment diverges at infinity for p >= 1/2")
    if c < 0:
        raise ValueError("c must be nonnegative")
    dmax = int(d.max())
    R = max(1e4, 50.0 * dmax**2, 100.0 * c)
    tail = _hankel_tail(d.astype(float), p, R, c)
    prev = None
    err = math.inf
    for ratio in (2.0, math.sqrt(2.0), 2.0**0.25):
        nodes, weights = panel_rule(1.0, R, ratio)
        w = weights * nodes ** (p - 1.0) * np.exp(-c / nodes)
        rows = bessel_rows(2.0 * nodes, dmax)[:, d]
        total = w @ rows + tail
        if prev is not None:
            scale = np.maximum(np.abs(total), 1e-300)
            err = float(np.max(np.abs(total - prev) / scale))
            if err <= tol:
                return total
        prev = total
    raise QuadratureError("tau quadrature did not converge", err)


def head_weights(p: float, kmax: int, c: float = 0.0, kmin: int = 0) -> np.ndarray:
    r"""``w_k = int_0^1 exp(-c/tau) tau^{k+p-1} dtau / k!`` for ``k = 0..kmax``.

    These multiply :math:`\Delta^k u` in the Taylor expansion of the
    semigroup on :math:`[0,1]`; ``k + p`` must be positive when ``c = 0``.
    Entries below ``kmin`` are left at zero.
    """
    out = np.zeros(kmax + 1)
    for k in range(kmin, kmax + 1):
        e = k + p - 1.0
        if c == 0.0:
            if e <= -1.0:
                raise ValueError("head integral diverges")
            val = 1.0 / (e + 1.0)
        else:
            val, _ = integrate.quad(lambda t: math.exp(-c / t) if t > 0 else 0.0, 0.0, 1.0,
                                    weight="alg", wvar=(e, 0.0), epsabs=0.0, epsrel=2e-14,
                                    limit=200)
        out[k] = val / math.factorial(k)
    return out


def lattice_laplacian_powers(values: np.ndarray, kmax: int) -> np.ndarray:
    """Powers ``Delta^k v`` of the unit-lattice Laplacian, ``k = 0..kmax``.

    Returns an array of shape ``(kmax + 1, len(values) + 2 kmax)``; row ``k``
    is padded so that column ``kmax`` corresponds to ``values[0]``.
    """
    n = values.size
    out = np.zeros((kmax + 1, n + 2 * kmax))
    cur = np.zeros(n + 2 * kmax)
    cur[kmax : kmax + n] = values
    out[0] = cur
    for k in range(1, kmax + 1):
        nxt = -2.0 * cur
        nxt[1:] += cur[:-1]
        nxt[:-1] += cur[1:]
        cur = nxt
        out[k] = cur
    return out
