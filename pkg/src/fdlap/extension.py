r"""Semidiscrete extension problem on :math:`\mathbb Z_h\times(0,\infty)`.

With :math:`a = 1-2s` and :math:`\kappa_s = \Gamma(1-s)/(4^{s-1/2}\Gamma(s))`,

* the Dirichlet extension
  :math:`w_j(y) = \frac{y^{2s}}{4^s\Gamma(s)}\int_0^\infty e^{-y^2/4t}
  e^{t\Delta_h}u_j\,\frac{dt}{t^{1+s}}` has weighted normal derivative
  :math:`-2s\lim_{y\to0}(w_j(y)-u_j)/y^{2s} = \kappa_s(-\Delta_h)^s u_j`;
* the Neumann extension
  :math:`v_j(y) = \frac{1}{\kappa_s\Gamma(s)}\int_0^\infty e^{-y^2/4t}
  e^{t\Delta_h}f_j\,\frac{dt}{t^{1-s}}` has trace
  :math:`v_j(0) = \kappa_s^{-1}(-\Delta_h)^{-s}f_j`.

The :math:`1/\kappa_s` in :math:`v` makes :math:`-y^a\partial_y v\to f` and
:math:`w = v` whenever :math:`(-\Delta_h)^s u = f/\kappa_s`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridFunction
from .kernels import NEGATIVE, check_order
from .operators import _resolve_window, _semigroup_integral

__all__ = [
    "extension_constant",
    "ExtensionSlice",
    "extension_dirichlet",
    "extension_neumann",
    "richardson_limit",
    "dirichlet_to_neumann",
    "neumann_to_dirichlet",
    "dtn_exponents",
    "ntd_exponents",
]


def extension_constant(s: float) -> float:
    r""":math:`\kappa_s = \Gamma(1-s)/(4^{s-1/2}\Gamma(s))`."""
    s = check_order(s)
    return math.gamma(1.0 - s) / (4.0 ** (s - 0.5) * math.gamma(s))


def dtn_exponents(s: float) -> list[float]:
    """Powers of ``y`` in the small-height expansion of ``(w - u)/y^{2s}``."""
    return [2.0 - 2.0 * s, 2.0, 4.0 - 2.0 * s, 4.0, 6.0 - 2.0 * s, 6.0]


def ntd_exponents(s: float) -> list[float]:
    """Powers of ``y`` in the small-height expansion of ``v(y)``."""
    return [2.0 * s, 2.0, 2.0 + 2.0 * s, 4.0, 4.0 + 2.0 * s, 6.0]


@dataclass(frozen=True)
class ExtensionSlice:
    """Extension values at a set of heights.

    ``values[k, i]`` is the extension at height ``heights[k]`` and index
    ``offset + i``. For the Dirichlet extension ``increments`` holds
    ``w - u`` computed without cancellation; for the Neumann one it equals
    ``values``.
    """

    s: float
    h: float
    offset: int
    heights: np.ndarray
    values: np.ndarray = field(repr=False)
    increments: np.ndarray = field(repr=False)

    @property
    def a(self) -> float:
        return 1.0 - 2.0 * self.s

    @property
    def indices(self) -> np.ndarray:
        return self.offset + np.arange(self.values.shape[1])

    def at_height(self, k: int) -> GridFunction:
        return GridFunction(self.h, self.offset, self.values[k])


def _heights(heights) -> np.ndarray:
    y = np.atleast_1d(np.asarray(heights, dtype=float))
    if y.size == 0 or np.any(~(y > 0)) or not np.all(np.isfinite(y)):
        raise ValueError("heights must be positive and finite")
    return y


def extension_dirichlet(u: GridFunction, s: float, heights, *, window=None,
                        tol: float = 1e-10) -> ExtensionSlice:
    """Dirichlet extension ``w(y)`` of compact boundary data ``u``.

    The default window is the stored window of ``u`` grown by ``len(u)``.
    """
    s = check_order(s)
    y = _heights(heights)
    lo, hi = _resolve_window(u, window, len(u))
    base = u.on_window(lo, hi).values
    incr = np.empty((y.size, hi - lo + 1))
    pref = u.h ** (-2.0 * s) / (4.0**s * math.gamma(s))
    for k, yk in enumerate(y):
        c = yk**2 / (4.0 * u.h**2)
        incr[k] = yk ** (2.0 * s) * pref * _semigroup_integral(u, -s, c, lo, hi, True, tol)
    return ExtensionSlice(s, u.h, lo, y, base[None, :] + incr, incr)


def extension_neumann(f: GridFunction, s: float, heights, *, window=None,
                      tol: float = 1e-10) -> ExtensionSlice:
    """Neumann extension ``v(y)`` of compact data ``f``; needs ``s < 1/2``."""
    s = check_order(s, NEGATIVE)
    y = _heights(heights)
    lo, hi = _resolve_window(f, window, len(f))
    vals = np.empty((y.size, hi - lo + 1))
    pref = f.h ** (2.0 * s) / (extension_constant(s) * math.gamma(s))
    for k, yk in enumerate(y):
        c = yk**2 / (4.0 * f.h**2)
        vals[k] = pref * _semigroup_integral(f, s, c, lo, hi, False, tol)
    return ExtensionSlice(s, f.h, lo, y, vals, vals)


def richardson_limit(heights, values, exponents) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate ``F(y) = L + sum_i c_i y^{e_i}`` to ``y = 0``.

    ``values`` has one row per height. With ``n`` exponents the first
    ``n + 1`` heights determine the fit exactly (least squares beyond).
    Returns the limit and the change from dropping the last exponent, a
    practical error estimate.
    """
    y = np.asarray(heights, dtype=float)
    F = np.asarray(values, dtype=float)
    if F.shape[0] != y.size:
        raise ValueError("values need one row per height")
    n = len(exponents)
    if y.size < n + 1:
        raise ValueError(f"{n} exponents need at least {n + 1} heights")
    scale = y.max()

    def fit(ex):
        V = np.column_stack([np.ones_like(y)] + [(y / scale) ** e for e in ex])
        coef, *_ = np.linalg.lstsq(V, F, rcond=None)
        return coef[0]

    full = fit(list(exponents))
    reduced = fit(list(exponents)[:-1]) if n > 0 else full
    return full, np.abs(full - reduced)


def _ladder(y0: float, levels: int) -> np.ndarray:
    return y0 * 0.5 ** np.arange(levels)


def dirichlet_to_neumann(u: GridFunction, s: float, *, y0: float | None = None, levels: int = 8,
                         window=None, tol: float = 1e-10) -> tuple[GridFunction, np.ndarray]:
    r"""Weighted normal derivative :math:`-2s\lim_{y\to0}(w(y)-u)/y^{2s}`.

    Heights ``y0 2^{-k}`` (default ``y0 = h/4``) feed a Richardson fit in
    the exponents of :func:`dtn_exponents`. Returns the limit, which should
    equal :math:`\kappa_s(-\Delta_h)^s u`, and the error estimate.
    """
    y = _ladder(0.25 * u.h if y0 is None else y0, levels)
    sl = extension_dirichlet(u, s, y, window=window, tol=tol)
    ratio = sl.increments / (y[:, None] ** (2.0 * s))
    lim, err = richardson_limit(y, ratio, dtn_exponents(s))
    return GridFunction(u.h, sl.offset, -2.0 * s * lim), 2.0 * s * err


def neumann_to_dirichlet(f: GridFunction, s: float, *, y0: float | None = None, levels: int = 8,
                         window=None, tol: float = 1e-10) -> tuple[GridFunction, np.ndarray]:
    r"""Trace :math:`\lim_{y\to0}v(y)`, which should equal :math:`\kappa_s^{-1}(-\Delta_h)^{-s}f`."""
    y = _ladder(0.25 * f.h if y0 is None else y0, levels)
    sl = extension_neumann(f, s, y, window=window, tol=tol)
    lim, err = richardson_limit(y, sl.values, ntd_exponents(s))
    return GridFunction(f.h, sl.offset, lim), err
