r"""Continuous-side references on the real line.

* :func:`continuous_frac_laplacian` evaluates
  :math:`(-\Delta)^sU(x) = A_s\int_0^\infty\big(2U(x)-U(x+r)-U(x-r)\big)\,r^{-1-2s}dr`
  by adaptive quadrature, with panels split where :math:`x\pm r` meets a
  non-smooth point of :math:`U` and an exact or oscillatory tail.
* :func:`riesz_potential` evaluates
  :math:`(-\Delta)^{-s}F(x) = A_{-s}\int F(y)|x-y|^{2s-1}dy` for compactly
  supported :math:`F`, with an algebraic endpoint weight at :math:`y=x` and
  a multipole expansion far from the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .grid import GridFunction
from .kernels import NEGATIVE, QuadratureError, check_order, constant_A

__all__ = [
    "TestFunction",
    "bump",
    "corpus",
    "corpus_by_id",
    "cosine",
    "continuous_frac_laplacian",
    "RieszSolution",
    "riesz_potential",
    "restrict",
]

DECAYS = ("compact", "gaussian", "cosine", "power")


@dataclass(frozen=True)
class TestFunction:
    """A real function with the metadata the quadratures rely on.

    Parameters
    ----------
    id : str
        Corpus identifier.
    func : callable
        Vectorised evaluator ``x -> U(x)``.
    k, alpha : int, float
        Hölder class ``C^{k, alpha}`` (``alpha = 1`` with large ``k`` for
        smooth entries).
    support : float
        ``U`` vanishes for ``|x| >= support``; ``inf`` if not compact.
    decay : {"compact", "gaussian", "cosine", "power"}
        Behaviour at infinity, which selects the tail treatment.
    kinks : tuple of (float, float)
        Points where ``U`` is not smooth, each with its local exponent
        (``U(x0 + r) - U(x0) ~ |r|^e``).
    derivative : callable, optional
        ``U'`` where it exists.
    omega : float
        Frequency of a cosine entry.
    """

    __test__ = False  # not a pytest class

    id: str
    func: Callable = field(repr=False)
    k: int
    alpha: float
    support: float = math.inf
    decay: str = "compact"
    kinks: tuple = ()
    derivative: Callable | None = field(default=None, repr=False)
    omega: float = 1.0
    klass: str = "smooth"
    scalar_func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.decay not in DECAYS:
            raise ValueError(f"unknown decay {self.decay!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")

    def __call__(self, x):
        return self.func(x)

    def scalar(self, x: float) -> float:
        """Fast evaluation at one point."""
        if self.scalar_func is not None:
            return self.scalar_func(x)
        return float(self.func(np.asarray(x, dtype=float)))


def bump(x):
    """Smooth bump ``exp(1 - 1/(1 - x^2))`` on ``|x| < 1`` (value 1 at 0), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out if out.ndim else float(out)


def _bump_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi)) * (-2.0 * xi / (1.0 - xi * xi) ** 2)
    return out if out.ndim else float(out)


def _bump_scalar(x: float) -> float:
    return math.exp(1.0 - 1.0 / (1.0 - x * x)) if abs(x) < 1.0 else 0.0


def _holder_entry(alpha: float) -> TestFunction:
    def f(x, a=alpha):
        x = np.asarray(x, dtype=float)
        return bump(x) * np.abs(x) ** a

    def fs(x, a=alpha):
        return _bump_scalar(x) * abs(x) ** a

    return TestFunction(f"holder_{alpha:g}", f, 0, alpha, 1.0, "compact", ((0.0, alpha),),
                        klass="holder", scalar_func=fs)


def _c1_entry(alpha: float) -> TestFunction:
    def f(x, a=alpha):
        x = np.asarray(x, dtype=float)
        return bump(x) * np.abs(x) ** (1.0 + a)

    def fp(x, a=alpha):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        return _bump_prime(x) * ax ** (1.0 + a) + bump(x) * (1.0 + a) * ax**a * np.sign(x)

    def fs(x, a=alpha):
        return _bump_scalar(x) * abs(x) ** (1.0 + a)

    return TestFunction(f"c1_{alpha:g}", f, 1, alpha, 1.0, "compact", ((0.0, 1.0 + alpha),), fp,
                        klass="c1alpha", scalar_func=fs)


def corpus() -> list[TestFunction]:
    """The test-function corpus.

    ``cos``, ``gauss`` and ``bump`` are smooth; ``holder_a`` is
    ``bump(x)|x|^a`` with exact Hölder exponent ``a`` at the origin, and
    ``c1_a`` is ``bump(x)|x|^{1+a}``, of class ``C^{1,a}``.
    """
    out = [
        TestFunction("cos", lambda x: np.cos(np.asarray(x, dtype=float)), 8, 1.0, math.inf, "cosine",
                     derivative=lambda x: -np.sin(np.asarray(x, dtype=float)), scalar_func=math.cos),
        TestFunction("gauss", lambda x: np.exp(-np.asarray(x, dtype=float) ** 2), 8, 1.0, math.inf,
                     "gaussian", derivative=lambda x: -2.0 * np.asarray(x) * np.exp(-np.asarray(x) ** 2),
                     scalar_func=lambda x: math.exp(-x * x)),
        TestFunction("bump", bump, 8, 1.0, 1.0, "compact", derivative=_bump_prime,
                     scalar_func=_bump_scalar),
    ]
    out += [_holder_entry(a) for a in (0.3, 0.6, 0.9)]
    out += [_c1_entry(a) for a in (0.3, 0.6)]
    return out


def corpus_by_id(name: str) -> TestFunction:
    for U in corpus():
        if U.id == name:
            return U
    raise KeyError(f"no corpus entry {name!r}")


def cosine(omega: float) -> TestFunction:
    """``cos(omega x)``, whose fractional Laplacian is ``|omega|^{2s} cos(omega x)``."""
    return TestFunction(f"cos_{omega:g}", lambda x: np.cos(omega * np.asarray(x, dtype=float)), 8, 1.0,
                        math.inf, "cosine", omega=omega, scalar_func=lambda x: math.cos(omega * x))


# ---------------------------------------------------------------------------
# (-Delta)^s U(x)
# ---------------------------------------------------------------------------

_QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
_HEAD_DEGREE = 24


def continuous_frac_laplacian(U: TestFunction, x: float, s: float, tol: float = 1e-8) -> float:
    """Singular-integral value of ``(-Delta)^s U`` at ``x``.

    At a smooth point the head ``[0, r1/2]`` integrates a Chebyshev
    interpolant of ``(2U(x) - U(x+r) - U(x-r))/r^2`` in ``r^2`` against
    ``r^{1-2s}``; at a kink with local exponent ``e`` the head ``[0, r1]``
    carries the weight ``r^{e-1-2s}`` (``r1`` is the distance to the nearest
    non-smooth point or support edge, at most 1). Further panels end where
    ``x +- r`` crosses such a point. Beyond the support (or 40 units for
    Gaussian decay) the tail is exact, a cosine tail uses Fourier
    quadrature and power decay an infinite-range rule.

    Raises
    ------
    ValueError
        If ``x`` is a kink with exponent ``<= 2s`` (the integral diverges).
    QuadratureError
        If the estimated absolute error exceeds ``tol``.
    """
    s = check_order(s)
    x = float(x)
    A = constant_A(s)
    u0 = U.scalar(x)

    def sym(r):
        return 2.0 * u0 - U.scalar(x + r) - U.scalar(x - r)

    breaks = sorted({abs(x - k) for k, _ in U.kinks if abs(x - k) > 1e-14})
    at_kink = [e for k, e in U.kinks if abs(x - k) <= 1e-14]
    e0 = min(at_kink) if at_kink else 2.0
    if e0 <= 2.0 * s:
        raise ValueError(f"the singular integral diverges at x={x}: local exponent {e0} <= 2s")
    if U.decay == "compact":
        cutoff = abs(x) + U.support
    elif U.decay == "gaussian":
        cutoff = abs(x) + 40.0
    else:
        cutoff = max(abs(x) + 10.0, 10.0)
    if U.decay == "compact":
        # the support edges are C^infinity but not analytic; they bound the panels
        breaks += [d for d in (abs(U.support - x), abs(U.support + x)) if d > 1e-14]
    r1 = min([1.0, cutoff] + breaks)
    on_edge = (U.decay == "compact" and abs(abs(x) - U.support) <= 1e-14) or bool(at_kink)
    err_total = 0.0
    if e0 == 2.0 and not on_edge:
        # smooth point: sym(r)/r^2 is an even analytic function of r, so
        # interpolate it in t = r^2 on [0, rc^2]; the Chebyshev nodes stay
        # away from r = 0, where the symmetric difference loses all digits
        rc = 0.5 * r1
        phi = np.polynomial.Chebyshev.interpolate(
            lambda t: np.array([sym(math.sqrt(v)) / v for v in t]), _HEAD_DEGREE, domain=[0.0, rc * rc])
        head, err = integrate.quad(lambda r: phi(r * r), 0.0, rc, weight="alg",
                                   wvar=(1.0 - 2.0 * s, 0.0), **_QUAD)
        err_total += err + float(np.sum(np.abs(phi.coef[-3:]))) * rc ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
        breaks.append(rc)
    else:
        # at a kink or a support edge sym(r)/r^e0 has no cancellation; floor
        # r away from 0 only to avoid evaluating the singular point itself
        rmin = 1e-5 * r1
        head, err = integrate.quad(lambda r: sym(max(r, rmin)) / max(r, rmin) ** e0, 0.0, r1,
                                   weight="alg", wvar=(e0 - 1.0 - 2.0 * s, 0.0), **_QUAD)
        err_total += err
        rc = r1
    edges = [rc] + sorted({b for b in breaks if rc < b < cutoff}) + [cutoff]
    total = head
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        val, err = integrate.quad(lambda r: sym(r) * r ** (-1.0 - 2.0 * s), a, b, **_QUAD)
        total += val
        err_total += err

    if U.decay in ("compact", "gaussian"):
        total += 2.0 * u0 * cutoff ** (-2.0 * s) / (2.0 * s)
    elif U.decay == "cosine":
        # 2U(x) - U(x+r) - U(x-r) = 2 cos(w x)(1 - cos(w r))
        w = U.omega
        osc, err = integrate.quad(lambda r: r ** (-1.0 - 2.0 * s), cutoff, np.inf, weight="cos",
                                  wvar=w, limlst=200)
        total += 2.0 * u0 * (cutoff ** (-2.0 * s) / (2.0 * s) - osc)
        err_total += 2.0 * abs(u0) * err
    else:
        val, err = integrate.quad(lambda r: sym(r) * r ** (-1.0 - 2.0 * s), cutoff, np.inf, **_QUAD)
        total += val
        err_total += err
    if A * err_total > tol:
        raise QuadratureError(f"fractional Laplacian quadrature at x={x}", A * err_total)
    return A * total


# ---------------------------------------------------------------------------
# Riesz potential
# ---------------------------------------------------------------------------

_MULTIPOLE_TERMS = 18


@dataclass(frozen=True)
class RieszSolution:
    r""":math:`U = A_{-s}\int F(y)|x-y|^{2s-1}dy`, the decaying solution of :math:`(-\Delta)^sU = F`.

    Evaluation switches to the multipole expansion
    :math:`A_{-s}|x|^{2s-1}\sum_k\binom{2s-1}{k}(-1)^k M_k x^{-k}`
    (:math:`M_k = \int F y^k`) once ``|x| >= 10 R0``.
    """

    F: TestFunction
    s: float
    moments: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        check_order(self.s, NEGATIVE)
        if not math.isfinite(self.F.support):
            raise ValueError("the Riesz potential needs a compactly supported source")
        if self.moments is None:
            R0 = self.F.support
            pts = sorted({k for k, _ in self.F.kinks if -R0 < k < R0})
            M = []
            for kk in range(_MULTIPOLE_TERMS + 1):
                val, _ = integrate.quad(lambda y: self.F.scalar(y) * y**kk, -R0, R0,
                                        points=pts or None, **_QUAD)
                M.append(val)
            object.__setattr__(self, "moments", np.asarray(M))

    @property
    def R0(self) -> float:
        return self.F.support

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.array([self._eval(float(v)) for v in xs.ravel()]).reshape(xs.shape)
        return out if out.ndim else float(out)

    def _eval(self, x: float) -> float:
        s = self.s
        A = constant_A(s, NEGATIVE)
        if abs(x) >= 10.0 * self.R0:
            k = np.arange(_MULTIPOLE_TERMS + 1)
            coef = special.binom(2.0 * s - 1.0, k) * (-1.0 / x) ** k
            return A * abs(x) ** (2.0 * s - 1.0) * float(np.dot(coef, self.moments))
        return A * _riesz_quad(self.F, x, s)

    def as_test_function(self) -> TestFunction:
        """View ``U`` as a corpus-style function.

        Power decay; the kinks of ``F`` carry exponents raised by ``2s`` and
        the support edges of ``F`` (smooth but not analytic) are listed with
        exponent 2 so quadrature panels end there.
        """
        kinks = tuple((k, min(e + 2.0 * self.s, 2.0)) for k, e in self.F.kinks)
        kinks += tuple((k, 2.0) for k in (-self.R0, self.R0) if all(k != q for q, _ in kinks))
        return TestFunction(f"riesz[{self.F.id}]", self, 0, min(self.F.alpha + 2.0 * self.s, 1.0),
                            math.inf, "power", kinks, klass="riesz", scalar_func=self._eval)


def _riesz_quad(F: TestFunction, x: float, s: float) -> float:
    # panels end at the support edges, the kinks of F and at y = x; each
    # endpoint singularity (|y-x|^b, and |y-k|^e at a kink k) becomes the
    # algebraic weight of that panel
    R0 = F.support
    b = 2.0 * s - 1.0
    kink_e = {k: e for k, e in F.kinks if -R0 < k < R0}
    # snap x onto a nearby panel point so no panel is shorter than rounding
    for p in [-R0, R0] + list(kink_e):
        if abs(x - p) <= 1e-12 * R0:
            x = p
    pts = sorted(set([-R0, R0] + list(kink_e) + ([x] if -R0 < x < R0 else [])))
    f = F.scalar
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        # |x - y|^b cancels exactly against the weight when x is an endpoint
        near_l, near_r = lo == x, hi == x
        wl = (b if near_l else 0.0) + kink_e.get(lo, 0.0)
        wr = (b if near_r else 0.0) + kink_e.get(hi, 0.0)
        pad = max(1e-12 * (hi - lo), 4.0 * np.spacing(max(abs(lo), abs(hi))))
        kl, kr = kink_e.get(lo, 0.0), kink_e.get(hi, 0.0)

        def g(y, lo=lo, hi=hi, kl=kl, kr=kr, pad=pad, near=near_l or near_r):
            y = min(max(y, lo + pad), hi - pad)
            val = f(y) if near else f(y) * abs(x - y) ** b
            if kl:
                val /= (y - lo) ** kl
            if kr:
                val /= (hi - y) ** kr
            return val

        if wl or wr:
            val, _ = integrate.quad(g, lo, hi, weight="alg", wvar=(wl, wr), **_QUAD)
        else:
            val, _ = integrate.quad(g, lo, hi, **_QUAD)
        total += val
    return total


def riesz_potential(F: TestFunction, x, s: float):
    """Riesz potential of a compactly supported corpus function at ``x`` (scalar or array)."""
    return RieszSolution(F, s)(x)


def restrict(U, h: float, window) -> GridFunction:
    """Sample ``(r_h U)_j = U(hj)`` for ``j`` in ``window = (lo, hi)``."""
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("empty window")
    j = np.arange(lo, hi + 1)
    return GridFunction(h, lo, np.asarray(U(h * j), dtype=float))
