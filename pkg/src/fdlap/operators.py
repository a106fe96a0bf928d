r"""Operators acting on :class:`~fdlap.grid.GridFunction` objects.

The main routes to :math:`(-\Delta_h)^s u` are

* :func:`frac_laplacian` -- the pointwise kernel formula, written as
  :math:`\Sigma_s^h u_j - (K \star u)_j` with a Toeplitz convolution;
* :func:`frac_laplacian_by_semigroup` -- quadrature of the heat-semigroup
  integral in the time variable;
* :func:`multiplier_oracle` -- the Fourier multiplier
  :math:`(4\sin^2(\theta/2)/h^2)^s` integrated by Gauss--Jacobi quadrature.

The three share no code beyond the Bessel and Gamma primitives, so they
serve as oracles for one another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .grid import GridFunction
from .kernels import NEGATIVE, POSITIVE, KernelTable, check_order, kernel_sum, kernel_value
from .quadrature import head_weights, lattice_laplacian_powers, tau_moments
from .specialfn import heat_kernel_radius, heat_kernel_row
from .toeplitz import symmetric_convolve

__all__ = [
    "discrete_laplacian",
    "frac_laplacian",
    "frac_integral",
    "heat_semigroup",
    "frac_laplacian_by_semigroup",
    "multiplier_oracle",
    "discrete_derivative",
    "HolderSeminorm",
    "holder_seminorm",
    "bilinear_form",
    "SobolevPoincare",
    "sobolev_poincare_check",
]

# Taylor order for exp(tau Delta) on tau in [0, 1]; 4^k/k! < 1e-17 beyond it.
_HEAD_ORDER = 48


def _check_table(table: KernelTable | None, s: float, h: float, sign: str) -> None:
    if table is None:
        return
    if table.sign != sign:
        raise ValueError(f"table holds the {table.sign} power, {sign} required")
    if not math.isclose(table.s, s, rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"table order {table.s} does not match s={s}")
    if not math.isclose(table.h, h, rel_tol=1e-14):
        raise ValueError(f"table mesh {table.h} does not match h={h}")


def _kernel_upto(s: float, h: float, sign: str, n: int, table: KernelTable | None) -> np.ndarray:
    if table is not None:
        return table.values_upto(n)
    return kernel_value(s, h, np.arange(n + 1), sign)


def _resolve_window(u: GridFunction, window, margin: int) -> tuple[int, int]:
    if window is not None:
        lo, hi = int(window[0]), int(window[1])
        if hi < lo:
            raise ValueError("empty output window")
        return lo, hi
    return u.lo - margin, u.hi + margin


def discrete_laplacian(u: GridFunction) -> GridFunction:
    """``(-Delta_h u)_j = -(u_{j+1} - 2u_j + u_{j-1})/h^2`` on the support grown by one."""
    v = np.zeros(len(u) + 2)
    v[1:-1] = 2.0 * u.values
    v[:-2] -= u.values
    v[2:] -= u.values
    return GridFunction(u.h, u.lo - 1, v / u.h**2)


def frac_laplacian(u: GridFunction, s: float, table: KernelTable | None = None, *,
                   window=None, method: str = "auto") -> GridFunction:
    r"""Pointwise formula :math:`\sum_{m\ne j}(u_j-u_m)K_s^h(j-m)`.

    Parameters
    ----------
    u : GridFunction
        Compactly supported input.
    s : float
        Order in ``(0, 1)``.
    table : KernelTable, optional
        Positive-power table for ``(s, u.h)``. Distances beyond its radius
        are filled in from the closed form, so the sum is never truncated.
    window : (int, int), optional
        Output index range. Defaults to the stored window of ``u`` grown by
        the table radius (or by ``len(u)`` without a table).
    method : {"auto", "fft", "direct"}
        Convolution path.
    """
    s = check_order(s)
    _check_table(table, s, u.h, POSITIVE)
    margin = table.radius if table is not None else len(u)
    lo, hi = _resolve_window(u, window, margin)
    need = max(hi - u.lo, u.hi - lo, 0)
    kern = _kernel_upto(s, u.h, POSITIVE, need, table)
    conv = symmetric_convolve(kern, u.values, u.lo, lo, hi - lo + 1, method)
    own = GridFunction(u.h, u.lo, u.values).on_window(lo, hi).values
    return GridFunction(u.h, lo, kernel_sum(s, u.h) * own - conv)


def frac_integral(f: GridFunction, s: float, table: KernelTable | None = None, *,
                  window=None, dilation: float = 1.0, method: str = "auto") -> GridFunction:
    r"""Negative power :math:`\sum_m K_{-s}^h(j-m) f_m`, for ``0 < s < 1/2``.

    The result decays only like :math:`|j|^{2s-1}`, so an output window is
    always finite: either ``window`` or the stored window of ``f`` grown by
    ``dilation * len(f)`` on each side.
    """
    s = check_order(s, NEGATIVE)
    _check_table(table, s, f.h, NEGATIVE)
    lo, hi = _resolve_window(f, window, int(math.ceil(dilation * len(f))))
    need = max(hi - f.lo, f.hi - lo, 0)
    kern = _kernel_upto(s, f.h, NEGATIVE, need, table)
    return GridFunction(f.h, lo, symmetric_convolve(kern, f.values, f.lo, lo, hi - lo + 1, method))


def heat_semigroup(u: GridFunction, t: float, tol: float = 1e-14) -> GridFunction:
    r""":math:`e^{t\Delta_h}u_j = \sum_m G(j-m, t/h^2)u_m`, truncated where the kernel tail is below ``tol``."""
    if not t >= 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return u
    tau = t / u.h**2
    radius = heat_kernel_radius(tau, tol)
    row = heat_kernel_row(tau, radius + len(u))
    lo, hi = u.lo - radius, u.hi + radius
    return GridFunction(u.h, lo, symmetric_convolve(row, u.values, u.lo, lo, hi - lo + 1))


def _semigroup_integral(u: GridFunction, p: float, c: float, lo: int, hi: int,
                        subtract: bool, tol: float) -> np.ndarray:
    r"""Integral over tau of exp(-c/tau) [e^{tau Delta}u - (u if subtract)] tau^{p-1} on lo..hi."""
    n_out = hi - lo + 1
    # head: Taylor series of the semigroup on [0, 1]
    k0 = 1 if subtract else 0
    w = head_weights(p, _HEAD_ORDER, c, k0)
    powers = lattice_laplacian_powers(u.values, _HEAD_ORDER)
    head_vals = (w[k0:, None] * powers[k0:]).sum(axis=0)
    head = GridFunction(u.h, u.lo - _HEAD_ORDER, head_vals).on_window(lo, hi).values
    # body and tail: tau in [1, inf)
    span = max(hi - u.lo, u.hi - lo, 0)
    g = tau_moments(p, np.arange(span + 1), c, tol)
    body = symmetric_convolve(g, u.values, u.lo, lo, n_out)
    if subtract:
        # int_1^inf exp(-c/tau) tau^{p-1} dtau, p < 0
        mass = 1.0 / -p if c == 0.0 else c**p * math.gamma(-p) * special.gammainc(-p, c)
        body = body - mass * GridFunction(u.h, u.lo, u.values).on_window(lo, hi).values
    return head + body


def frac_laplacian_by_semigroup(u: GridFunction, s: float, tol: float = 1e-10, *,
                                window=None) -> GridFunction:
    r"""Semigroup formula
    :math:`\frac{1}{\Gamma(-s)}\int_0^\infty(e^{t\Delta_h}u_j-u_j)\,t^{-1-s}dt`.

    After :math:`\tau=t/h^2` the integral over :math:`[0,1]` uses the Taylor
    series of :math:`e^{\tau\Delta}`, the rest geometric Gauss--Legendre
    panels and a closed-form Bessel tail. The default window is the stored
    window of ``u`` grown by ``len(u)``.
    """
    s = check_order(s)
    lo, hi = _resolve_window(u, window, len(u))
    vals = _semigroup_integral(u, -s, 0.0, lo, hi, True, tol)
    # 1/Gamma(-s) = -s/Gamma(1-s)
    return GridFunction(u.h, lo, -s / math.gamma(1.0 - s) * u.h ** (-2.0 * s) * vals)


def multiplier_oracle(u: GridFunction, s: float, *, window=None, nodes: int | None = None) -> GridFunction:
    r"""Fourier-multiplier evaluation of :math:`(-\Delta_h)^s u` for ``0 < s <= 1``.

    .. math::
        (-\Delta_h)^s u_j = \frac1\pi\int_0^\pi
        \Big(\frac{2\sin(\varphi/2)}{h}\Big)^{2s}
        \operatorname{Re}\big[\hat u(\varphi)e^{-ij\varphi}\big]\,d\varphi,
        \qquad \hat u(\varphi)=\sum_k u_k e^{ik\varphi}.

    The endpoint singularity :math:`\varphi^{2s}` is the Gauss--Jacobi
    weight; the remaining factor is analytic on ``[0, pi]``.
    """
    if not 0.0 < s <= 1.0:
        raise ValueError("multiplier oracle needs 0 < s <= 1")
    lo, hi = _resolve_window(u, window, len(u))
    span = max(hi - u.lo, u.hi - lo, 1)
    n = nodes if nodes is not None else 2 * span + 100
    x, wx = special.roots_jacobi(n, 0.0, 2.0 * s)
    phi = 0.5 * math.pi * (1.0 + x)
    # (1+x)^{2s} = (2 phi/pi)^{2s}: fold the Jacobian and the weight back into phi^{2s}
    smooth = (2.0 * np.sin(0.5 * phi) / phi) ** (2.0 * s)
    weights = wx * (0.5 * math.pi) ** (1.0 + 2.0 * s) * smooth / math.pi * u.h ** (-2.0 * s)
    j = np.arange(lo, hi + 1)
    k = u.indices
    # Re[u_hat e^{-ij phi}] = sum_k u_k cos((k - j) phi)
    out = np.empty(j.size)
    for start in range(0, j.size, 256):
        jj = j[start : start + 256]
        d = (k[None, :] - jj[:, None]).astype(float)
        cos = np.cos(d[:, :, None] * phi[None, None, :])
        out[start : start + jj.size] = np.einsum("k,jkq,q->j", u.values, cos, weights)
    return GridFunction(u.h, lo, out)


def discrete_derivative(u: GridFunction, direction: str = "plus") -> GridFunction:
    """Forward ``D_+u_j = (u_{j+1} - u_j)/h`` or backward ``D_-u_j = (u_j - u_{j-1})/h``.

    The result covers every index where it can be nonzero, so the stored
    window grows by one.
    """
    v = np.zeros(len(u) + 1)
    v[:-1] += u.values
    v[1:] -= u.values
    v /= u.h
    if direction == "plus":
        return GridFunction(u.h, u.lo - 1, v)
    if direction == "minus":
        return GridFunction(u.h, u.lo, v)
    raise ValueError("direction must be 'plus' or 'minus'")


@dataclass(frozen=True)
class HolderSeminorm:
    """Discrete Hölder seminorm ``[u]_{C_h^{k,alpha}}`` over a stored window."""

    k: int
    alpha: float
    value: float


def _holder_0(v: np.ndarray, h: float, alpha: float) -> float:
    best = 0.0
    for d in range(1, v.size):
        q = np.max(np.abs(v[d:] - v[:-d])) / (h * d) ** alpha
        if q > best:
            best = q
    return float(best)


def holder_seminorm(u: GridFunction, k: int = 0, alpha: float = 1.0) -> HolderSeminorm:
    r"""Seminorm :math:`\sum_{\gamma+\eta=k}\sup_{j\ne m}|D^{\gamma,\eta}u_j-D^{\gamma,\eta}u_m|/|hj-hm|^\alpha`.

    The supremum runs over pairs inside the stored window only, by brute
    force over all lags. Every composition :math:`D_+^\gamma D_-^\eta` is a
    shift of :math:`D_+^k`, so the ``k + 1`` terms of the sum coincide.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    v = np.asarray(u.values, dtype=float)
    for _ in range(k):
        v = np.diff(v) / u.h
    value = 0.0 if v.size < 2 else (k + 1) * _holder_0(v, u.h, alpha)
    return HolderSeminorm(k, alpha, value)


def bilinear_form(u: GridFunction, v: GridFunction, s: float,
                  table: KernelTable | None = None) -> float:
    r"""Energy form :math:`\frac h2\sum_j\sum_{m\ne j}(u_j-u_m)(v_j-v_m)K_s^h(j-m)`.

    Pairs inside the common window are summed lag by lag; pairs with one
    point outside use the exact exterior mass
    :math:`\Sigma_s^h - \sum_{m\in W}K_s^h(j-m)`.
    """
    s = check_order(s)
    if not math.isclose(u.h, v.h, rel_tol=1e-14):
        raise ValueError("mesh mismatch")
    _check_table(table, s, u.h, POSITIVE)
    lo, hi = min(u.lo, v.lo), max(u.hi, v.hi)
    a = u.on_window(lo, hi).values
    b = v.on_window(lo, hi).values
    n = a.size
    kern = _kernel_upto(s, u.h, POSITIVE, n, table)
    inner = 0.0
    for d in range(1, n):
        inner += kern[d] * np.dot(a[d:] - a[:-d], b[d:] - b[:-d])
    within = symmetric_convolve(kern, np.ones(n), lo, lo, n)
    outer = np.dot(a * b, kernel_sum(s, u.h) - within)
    return float(u.h * (inner + outer))


@dataclass(frozen=True)
class SobolevPoincare:
    """Both sides of the fractional Sobolev and Poincaré inequalities.

    ``energy`` is ``||(-Delta_h)^{s/2} u||_{l^2_h}``; the ratios are left
    side over right side without the unknown constant.
    """

    sobolev_lhs: float
    poincare_lhs: float
    energy: float
    poincare_factor: float
    sobolev_ratio: float
    poincare_ratio: float


def sobolev_poincare_check(u: GridFunction, s: float, table: KernelTable | None = None) -> SobolevPoincare:
    r"""Evaluate :math:`\|u\|_{\ell^{2/(1-2s)}_h}`, :math:`\|u\|_{\ell^2_h}` and the energy.

    The Poincaré right side carries :math:`h^s(\#\operatorname{supp}u)^s`.
    A zero function gives zero on both sides and ratios of zero.
    """
    s = check_order(s, NEGATIVE)
    energy = math.sqrt(max(bilinear_form(u, u, s, table), 0.0))
    q = 2.0 / (1.0 - 2.0 * s)
    lhs_s = u.norm(q)
    lhs_p = u.norm(2.0)
    factor = u.h**s * u.support_count() ** s
    if energy == 0.0:
        return SobolevPoincare(lhs_s, lhs_p, 0.0, factor, 0.0, 0.0)
    return SobolevPoincare(lhs_s, lhs_p, energy, factor, lhs_s / energy, lhs_p / (factor * energy))
