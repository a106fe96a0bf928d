r"""Kernels of the fractional powers :math:`(-\Delta_h)^{\pm s}` on ``Z_h``.

The positive power acts as
:math:`(-\Delta_h)^s u_j = \sum_{m\ne j}(u_j-u_m)K_s^h(j-m)` and the negative
power as the convolution :math:`\sum_m K_{-s}^h(j-m) f_m`, with

.. math::
    K_s^h(m) = A_s \frac{\Gamma(|m|-s)}{h^{2s}\Gamma(|m|+1+s)}, \qquad
    K_{-s}^h(m) = A_{-s} \frac{h^{2s}\Gamma(|m|+s)}{\Gamma(|m|+1-s)} .

Besides the closed forms this module carries two independent routes used as
oracles: the reflection form of the positive kernel and the heat-semigroup
integral evaluated by quadrature.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .quadrature import QuadratureError, tau_moments
from .specialfn import gamma_ratio

__all__ = [
    "POSITIVE",
    "NEGATIVE",
    "QuadratureError",
    "TailToleranceError",
    "check_order",
    "constant_A",
    "kernel_value",
    "kernel_value_alt",
    "kernel_by_quadrature",
    "KernelTable",
    "build_table",
    "kernel_sum",
    "exact_tail_mass",
    "JumpLaw",
    "jump_law",
    "h_s_function",
    "kernel_csv",
]

POSITIVE = "positive"
NEGATIVE = "negative"


class TailToleranceError(ValueError):
    """Requested tail tolerance needs a radius beyond the configured cap."""

    def __init__(self, message: str, achievable: float):
        super().__init__(f"{message}; best achievable tolerance {achievable:.3e}")
        self.achievable = achievable


def _sign(sign: str) -> str:
    if sign in (POSITIVE, "+", "pos", "positive_power"):
        return POSITIVE
    if sign in (NEGATIVE, "-", "neg", "negative_power"):
        return NEGATIVE
    raise ValueError(f"unknown power sign {sign!r}")


def check_order(s: float, sign: str = POSITIVE) -> float:
    """Validate a fractional order: ``0 < s < 1``, and ``s < 1/2`` for the negative power."""
    s = float(s)
    if not (0.0 < s < 1.0):
        raise ValueError(f"fractional order must lie in (0, 1), got {s}")
    if _sign(sign) == NEGATIVE and not s < 0.5:
        raise ValueError(f"the negative power needs 0 < s < 1/2, got {s}")
    return s


def constant_A(s: float, sign: str = POSITIVE) -> float:
    r"""Normalising constant :math:`A_s` (positive) or :math:`A_{-s}` (negative).

    :math:`A_s = 4^s\Gamma(1/2+s)/(\sqrt\pi|\Gamma(-s)|)` and
    :math:`A_{-s} = 4^{-s}\Gamma(1/2-s)/(\sqrt\pi\Gamma(s))`.
    """
    sign = _sign(sign)
    s = check_order(s, sign)
    if sign == POSITIVE:
        # |Gamma(-s)| = Gamma(1-s)/s
        return 4.0**s * s * math.gamma(0.5 + s) / (math.sqrt(math.pi) * math.gamma(1.0 - s))
    return 4.0**-s * math.gamma(0.5 - s) / (math.sqrt(math.pi) * math.gamma(s))


def kernel_value(s: float, h: float, m, sign: str = POSITIVE):
    """Closed-form kernel ``K_{+-s}^h(m)``; ``m`` may be an integer or an integer array."""
    sign = _sign(sign)
    A = constant_A(s, sign)
    if not h > 0:
        raise ValueError("mesh size must be positive")
    marr = np.abs(np.asarray(m))
    scalar = marr.ndim == 0
    mm = np.atleast_1d(marr).astype(float)
    if sign == POSITIVE:
        out = np.zeros_like(mm)
        nz = mm > 0
        if np.any(nz):
            out[nz] = A * h ** (-2.0 * s) * gamma_ratio(mm[nz], -s, 1.0 + s)
    else:
        out = A * h ** (2.0 * s) * gamma_ratio(mm, s, 1.0 - s)
    return float(out[0]) if scalar else out


def _lgamma_signed(x: float) -> tuple[float, float]:
    # log|Gamma(x)| and sign(Gamma(x)) for non-integer or positive x
    lg = math.lgamma(x)
    if x > 0:
        return lg, 1.0
    return lg, (-1.0) ** (math.floor(-x) + 1)


def kernel_value_alt(s: float, m: int) -> float:
    r"""Reflection form of the unit-mesh kernel,

    .. math::
        K_s^1(m) = \frac{(-1)^{m+1}\Gamma(2s+1)}{\Gamma(1+s+m)\Gamma(1+s-m)},
        \qquad m\ne0,

    evaluated through signed log-gamma values (the argument ``1+s-|m|`` is
    negative for ``|m| >= 2``).
    """
    s = check_order(s)
    m = abs(int(m))
    if m == 0:
        raise ValueError("the reflection form is defined for m != 0 only")
    la, _ = _lgamma_signed(2.0 * s + 1.0)
    lb, _ = _lgamma_signed(1.0 + s + m)
    lc, sc = _lgamma_signed(1.0 + s - m)
    sign = (-1.0) ** (m + 1) * sc
    return sign * math.exp(la - lb - lc)


# ---------------------------------------------------------------------------
# Semigroup quadrature
# ---------------------------------------------------------------------------

def _series_head(m: np.ndarray, p: float, r1: float) -> np.ndarray:
    """int_0^{r1} G(m, r) r^{p-1} dr from the Kummer series of G."""
    # G(m, r) = r^m/m! * M(m+1/2, 2m+1, -4r), integrated term by term
    out = np.zeros(m.size)
    for i, mi in enumerate(m):
        logpref = -math.lgamma(mi + 1.0) + (mi + p) * math.log(r1)
        if logpref < -745.0:
            continue
        coef = 1.0
        acc = 0.0
        for k in range(400):
            term = coef * r1**k / (mi + p + k)
            acc += term
            if k > 4 and abs(term) < 1e-18 * abs(acc):
                break
            coef *= (mi + 0.5 + k) / ((2.0 * mi + 1.0 + k) * (k + 1.0)) * (-4.0)
        out[i] = math.exp(logpref) * acc
    return out


def semigroup_moment(m, p: float, tol: float = 1e-10) -> np.ndarray:
    r"""Compute :math:`\int_0^\infty G(m,r)\,r^{p-1}\,dr` for integers ``m`` and ``p < 1/2``.

    The interval is split at ``r = 1`` (series, integrated exactly term by
    term), Gauss--Legendre panels of geometric length up to a cutoff, and a
    closed-form tail from the large-argument expansion of :math:`I_m`.
    Panels are refined by halving their ratio until two levels agree to
    ``tol``.
    """
    m = np.atleast_1d(np.abs(np.asarray(m, dtype=int)))
    if p >= 0.5:
        raise ValueError("moment diverges at infinity for p >= 1/2")
    if np.any(m + p <= 0):
        raise ValueError("moment diverges at zero (m + p <= 0)")
    return _series_head(m.astype(float), p, 1.0) + tau_moments(p, m, 0.0, tol)


def kernel_by_quadrature(s: float, h: float, m, sign: str = POSITIVE, tol: float = 1e-10):
    r"""Kernel from the heat-semigroup integral, independent of the Gamma closed form.

    .. math::
        K_s^h(m) = \frac{1}{h^{2s}|\Gamma(-s)|}\int_0^\infty G(m,r)\frac{dr}{r^{1+s}},
        \qquad
        K_{-s}^h(m) = \frac{h^{2s}}{\Gamma(s)}\int_0^\infty G(m,r)\frac{dr}{r^{1-s}} .
    """
    sign = _sign(sign)
    s = check_order(s, sign)
    marr = np.asarray(m)
    scalar = marr.ndim == 0
    mm = np.atleast_1d(np.abs(marr)).astype(int)
    if sign == POSITIVE:
        if np.any(mm == 0):
            raise ValueError("the positive-power integral diverges at m = 0")
        vals = semigroup_moment(mm, -s, tol) * s / math.gamma(1.0 - s) * h ** (-2.0 * s)
    else:
        vals = semigroup_moment(mm, s, tol) / math.gamma(s) * h ** (2.0 * s)
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# Tables, sums, jump law
# ---------------------------------------------------------------------------

def kernel_sum(s: float, h: float = 1.0) -> float:
    r""":math:`\Sigma_s^h = \sum_m K_s^h(m) = 4^s\Gamma(1/2+s)/(h^{2s}\sqrt\pi\,\Gamma(1+s))`."""
    s = check_order(s)
    return 4.0**s * math.gamma(0.5 + s) / (h ** (2.0 * s) * math.sqrt(math.pi) * math.gamma(1.0 + s))


def exact_tail_mass(s: float, h: float, M: int) -> float:
    r"""Two-sided tail :math:`\sum_{|m|>M} K_s^h(m)`.

    Uses the telescoping identity
    :math:`\Gamma(m-s)/\Gamma(m+1+s) = (g(m)-g(m+1))/(2s)` with
    :math:`g(m)=\Gamma(m-s)/\Gamma(m+s)`.
    """
    s = check_order(s)
    return constant_A(s) * h ** (-2.0 * s) * gamma_ratio(M + 1, -s, s) / s


@dataclass(frozen=True)
class KernelTable:
    """Kernel values ``K(0..radius)`` for one ``(s, h, sign)``; immutable.

    ``tail_constant`` is the largest of ``K(m) h^{+-2s} m^{1+-2s}`` over the
    last decade of the table, the coefficient of the power-law tail model.
    """

    s: float
    h: float
    sign: str
    radius: int
    values: np.ndarray = field(repr=False)
    tail_constant: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def exponent(self) -> float:
        """Decay exponent of the kernel: ``1+2s`` or ``1-2s``."""
        return 1.0 + 2.0 * self.s if self.sign == POSITIVE else 1.0 - 2.0 * self.s

    def values_upto(self, n: int) -> np.ndarray:
        """``K(0..n)``, extending past the stored radius with the closed form."""
        n = int(n)
        if n <= self.radius:
            return self.values[: n + 1]
        extra = kernel_value(self.s, self.h, np.arange(self.radius + 1, n + 1), self.sign)
        return np.concatenate([self.values, extra])

    def diagonal(self) -> float:
        """``Sigma_s^h`` for the positive power."""
        if self.sign != POSITIVE:
            raise ValueError("the kernel sum exists for the positive power only")
        return kernel_sum(self.s, self.h)

    def tail_bound(self, M: int | None = None) -> float:
        """Safety-factored bound on the two-sided tail beyond ``M`` (positive power)."""
        M = self.radius if M is None else M
        return 2.0 * self.tail_constant * self.h ** (-2.0 * self.s) / (self.s * M ** (2.0 * self.s))

    def tail_model(self, m) -> np.ndarray:
        """Power-law model ``tail_constant h^{-+2s} |m|^{-(1+-2s)}``."""
        m = np.abs(np.asarray(m, dtype=float))
        hs = self.h ** (-2.0 * self.s) if self.sign == POSITIVE else self.h ** (2.0 * self.s)
        with np.errstate(divide="ignore"):
            return self.tail_constant * hs * m ** (-self.exponent)

    def truncated_sum(self) -> float:
        """``sum_{|m| <= radius} K(m)``."""
        return float(self.values[0] + 2.0 * np.sum(self.values[1:]))

    def sum_with_tail(self) -> float:
        """Truncated sum plus the exact telescoped tail (positive power)."""
        if self.sign != POSITIVE:
            raise ValueError("the kernel sum exists for the positive power only")
        return self.truncated_sum() + exact_tail_mass(self.s, self.h, self.radius)


def _fit_tail_constant(s: float, h: float, sign: str, values: np.ndarray) -> float:
    M = values.size - 1
    lo = max(1, M // 10)
    m = np.arange(lo, M + 1, dtype=float)
    if sign == POSITIVE:
        scaled = values[lo:] * h ** (2.0 * s) * m ** (1.0 + 2.0 * s)
    else:
        scaled = values[lo:] * h ** (-2.0 * s) * m ** (1.0 - 2.0 * s)
    return float(np.max(scaled))


def build_table(s: float, h: float = 1.0, sign: str = POSITIVE, tail_tol: float = 1e-6,
                radius: int | None = None, max_radius: int = 1 << 22) -> KernelTable:
    """Tabulate the kernel up to a truncation radius.

    For the positive power the radius is the smallest power of two whose
    tail bound ``2 C / (s h^{2s} M^{2s})`` falls below ``tail_tol``; a
    radius above ``max_radius`` raises :class:`TailToleranceError`. The
    negative-power kernel is not summable, so its radius must be given (or
    defaults to 1024) and is set by the convolution window of the caller.
    """
    sign = _sign(sign)
    s = check_order(s, sign)
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    if radius is None and sign == NEGATIVE:
        radius = 1024
    if radius is not None:
        radius = int(radius)
        if radius < 1:
            raise ValueError("radius must be at least 1")
        values = kernel_value(s, h, np.arange(radius + 1), sign)
        return KernelTable(s, h, sign, radius, values, _fit_tail_constant(s, h, sign, values))

    M = 1024
    while True:
        values = kernel_value(s, h, np.arange(M + 1), sign)
        C = _fit_tail_constant(s, h, sign, values)
        need = (2.0 * C * h ** (-2.0 * s) / (s * tail_tol)) ** (1.0 / (2.0 * s))
        if need <= M:
            target = max(1, int(math.ceil(need)))
            M_final = 1 << max(0, (target - 1).bit_length())
            M_final = min(M_final, M)
            values = values[: M_final + 1]
            return KernelTable(s, h, sign, M_final, values, C)
        if need > max_radius:
            achievable = 2.0 * C * h ** (-2.0 * s) / (s * max_radius ** (2.0 * s))
            raise TailToleranceError(
                f"tail tolerance {tail_tol:g} at s={s} needs radius ~{need:.3g} > cap {max_radius}",
                achievable,
            )
        M = min(max_radius, 1 << int(math.ceil(math.log2(need))))


@dataclass(frozen=True)
class JumpLaw:
    """Jump probabilities ``P_s(m) = K_s^1(m) / Sigma_s^1`` for ``|m| <= radius``."""

    s: float
    radius: int
    probabilities: np.ndarray = field(repr=False)

    @property
    def m(self) -> np.ndarray:
        return np.arange(-self.radius, self.radius + 1)

    def __call__(self, m) -> np.ndarray:
        m = np.asarray(m)
        out = np.zeros(m.shape)
        inside = np.abs(m) <= self.radius
        out[inside] = self.probabilities[m[inside] + self.radius]
        return out

    @property
    def captured_mass(self) -> float:
        return float(np.sum(self.probabilities))

    @property
    def tail_mass(self) -> float:
        return exact_tail_mass(self.s, 1.0, self.radius) / kernel_sum(self.s, 1.0)


def jump_law(s: float, radius: int, tail_tol: float = 1e-12) -> JumpLaw:
    """Probability law of the nonlocal mean value property (independent of ``h``).

    Raises ``ArithmeticError`` if the captured mass plus the exact tail
    differs from one by more than ``tail_tol``.
    """
    s = check_order(s)
    m = np.arange(-radius, radius + 1)
    p = kernel_value(s, 1.0, m) / kernel_sum(s, 1.0)
    law = JumpLaw(s, int(radius), p)
    mass = law.captured_mass
    if mass > 1.0 + tail_tol or abs(mass + law.tail_mass - 1.0) > tail_tol:
        raise ArithmeticError(f"jump law mass {mass!r} inconsistent with tail {law.tail_mass!r}")
    return law


def h_s_function(s: float, r: float, k: int = 0) -> float:
    r"""Derivative of order ``k`` of
    :math:`H_s(r) = \int_0^\infty e^{-(r+s)v}(1-e^{-v})^{-2s}\,dv`, for ``0 < s < 1/2``.

    After ``v = w/(r+s)`` the integrand is ``e^{-w} w^{k-2s}`` times a
    smooth factor, integrated with an algebraic endpoint weight.
    """
    s = check_order(s, NEGATIVE)
    if not r > 0:
        raise ValueError("H_s needs r > 0")
    if k not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    lam = r + s

    def smooth(w):
        t = w / lam
        q = -math.expm1(-t) / t if t > 0 else 1.0
        return math.exp(-w) * q ** (-2.0 * s)

    head, e1 = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(k - 2.0 * s, 0.0),
                              epsabs=0.0, epsrel=1e-13, limit=200)
    tail, e2 = integrate.quad(lambda w: smooth(w) * w ** (k - 2.0 * s), 1.0, np.inf,
                              epsabs=0.0, epsrel=1e-13, limit=200)
    total = head + tail
    if e1 + e2 > 1e-9 * abs(total):
        raise QuadratureError("H_s quadrature failed", (e1 + e2) / abs(total))
    return (-1.0) ** k * lam ** (-1.0 - k + 2.0 * s) * total


def kernel_csv(s: float, h: float, radius: int, path=None) -> str:
    """CSV dump with columns ``m, K_pos, K_neg, tail_model``.

    ``K_neg`` is blank when ``s >= 1/2``; ``tail_model`` is the fitted power
    law of the positive kernel.
    """
    table = build_table(s, h, POSITIVE, radius=radius)
    neg = kernel_value(s, h, np.arange(radius + 1), NEGATIVE) if s < 0.5 else None
    model = table.tail_model(np.arange(radius + 1))
    buf = io.StringIO()
    buf.write("m,K_pos,K_neg,tail_model\n")
    for m in range(radius + 1):
        kn = "" if neg is None else repr(float(neg[m]))
        tm = "" if m == 0 else repr(float(model[m]))
        buf.write(f"{m},{float(table.values[m])!r},{kn},{tm}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
