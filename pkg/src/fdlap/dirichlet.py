r"""Nonlocal Dirichlet problem on the discrete ball :math:`B_R^h = \{hj : |hj| < R\}`.

.. math::
    (-\Delta_h)^s u = f \ \text{in } B_R^h, \qquad u = g \ \text{in } \mathbb Z_h\setminus B_R^h .

Restricted to the interior the operator is :math:`\Sigma_s^h I - T` with
:math:`T` the symmetric Toeplitz matrix of :math:`K_s^h` (zero diagonal).
The exterior datum moves to the right-hand side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .grid import GridFunction
from .kernels import KernelTable, check_order, kernel_sum, kernel_value
from .operators import frac_laplacian
from .toeplitz import FFT_CROSSOVER, SymmetricToeplitz, symmetric_convolve

__all__ = [
    "ConvergenceError",
    "DirichletSystem",
    "interior_radius",
    "assemble",
    "matvec",
    "SolveReport",
    "solve",
    "barrier",
    "barrier_ratio",
    "MaxPrincipleReport",
    "max_principle_check",
    "apriori_ratio",
]


class ConvergenceError(RuntimeError):
    """Conjugate gradients stopped before reaching the tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message}: relative residual {residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


def interior_radius(R: float, h: float) -> int:
    """Largest ``J`` with ``h J < R``; the interior is ``-J..J``."""
    if not (h > 0 and R > h):
        raise ValueError(f"the interior is empty or trivial: need R > h > 0 (R={R}, h={h})")
    return int(math.ceil(R / h - 1e-9)) - 1


@dataclass(frozen=True)
class DirichletSystem:
    """Assembled system ``(Sigma I - T) x = b`` on the interior indices ``-J..J``."""

    s: float
    h: float
    R: float
    J: int
    diagonal: float
    column: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    f: GridFunction = field(repr=False)
    g: GridFunction | None = field(repr=False, default=None)
    g_constant: float = 0.0
    toeplitz: SymmetricToeplitz = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return 2 * self.J + 1

    @property
    def lo(self) -> int:
        return -self.J

    def dense(self) -> np.ndarray:
        return self.diagonal * np.eye(self.n) - self.toeplitz.dense()


def assemble(s: float, h: float, R: float, f, g=None, table: KernelTable | None = None,
             crossover: int = FFT_CROSSOVER) -> DirichletSystem:
    """Build the interior system.

    Parameters
    ----------
    f : GridFunction or float
        Right-hand side; only its values on the interior are used. A float
        is a constant right-hand side.
    g : GridFunction, float or None
        Exterior datum. A GridFunction contributes its values outside the
        ball; a float ``g0`` is the constant datum, whose exterior sum
        ``g0 (Sigma - sum_{interior} K)`` is exact.
    """
    s = check_order(s)
    J = interior_radius(R, h)
    n = 2 * J + 1
    if table is not None and not math.isclose(table.h, h, rel_tol=1e-14):
        raise ValueError("table mesh does not match h")
    sigma = kernel_sum(s, h)
    if isinstance(f, GridFunction):
        if not math.isclose(f.h, h, rel_tol=1e-14):
            raise ValueError("right-hand side mesh does not match h")
        fvals = f.on_window(-J, J).values
    else:
        fvals = np.full(n, float(f))
    fgrid = GridFunction(h, -J, fvals)

    # kernel distances up to the widest interior/exterior pair used below
    glo, ghi = -J, J
    if isinstance(g, GridFunction):
        glo, ghi = min(g.lo, -J), max(g.hi, J)
    need = max(ghi - glo, n)
    kern = table.values_upto(need) if table is not None else kernel_value(s, h, np.arange(need + 1))
    column = kern[:n]
    b = fvals.copy()
    g_grid = None
    g0 = 0.0
    if isinstance(g, GridFunction):
        outside = g.values.copy()
        idx = g.indices
        outside[np.abs(idx) <= J] = 0.0
        g_grid = GridFunction(h, g.lo, outside)
        if np.any(outside):
            b += symmetric_convolve(kern, outside, g.lo, -J, n)
    elif g is not None:
        g0 = float(g)
        if g0 != 0.0:
            within = symmetric_convolve(kern, np.ones(n), -J, -J, n)
            b += g0 * (sigma - within)
    return DirichletSystem(s, h, float(R), J, sigma, column, b, fgrid, g_grid, g0,
                           SymmetricToeplitz(column, crossover))


def matvec(system: DirichletSystem, x, method: str = "auto") -> np.ndarray:
    """``A x = Sigma x - T x``."""
    x = np.asarray(x, dtype=float)
    return system.diagonal * x - system.toeplitz.matvec(x, method)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of :func:`solve`.

    ``solution`` covers the interior and any stored exterior datum;
    ``min_ritz`` is the smallest Ritz value of ``A`` from the CG
    tridiagonalisation, a positive-definiteness witness.
    """

    iterations: int
    residual: float
    solution: GridFunction
    interior: np.ndarray = field(repr=False)
    min_ritz: float = math.nan


def _ritz_min(alphas, betas, scale: float) -> float:
    if not alphas:
        return math.nan
    a = np.asarray(alphas)
    b = np.asarray(betas[: len(alphas) - 1])
    d = 1.0 / a
    d[1:] += b / a[:-1]
    e = np.sqrt(b) / a[:-1]
    lam = eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 0))
    return float(lam[0] * scale)


_RESTARTS = 5


def solve(system: DirichletSystem, tol: float = 1e-10, max_iter: int | None = None,
          x0=None) -> SolveReport:
    """Preconditioned conjugate gradients with the (constant) diagonal as preconditioner.

    Stops when the freshly computed ``||b - A x|| / ||b|| <= tol``, restarting
    from that residual up to five times when the recursive residual has
    drifted below it; raises :class:`ConvergenceError` otherwise.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = system.n
    max_iter = max_iter if max_iter is not None else max(10 * n, 100)
    b = system.rhs
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    dinv = 1.0 / system.diagonal
    alphas: list[float] = []
    betas: list[float] = []
    if bnorm == 0.0:
        return _report(system, np.zeros(n), 0, 0.0, math.nan)
    it = 0
    # the recursive residual drifts from b - Ax in floating point; when the
    # fresh residual misses tol, restart from it (a few times at most)
    for cycle in range(_RESTARTS + 1):
        r = b - matvec(system, x)
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol or it >= max_iter:
            break
        z = dinv * r
        p = z.copy()
        rz = float(r @ z)
        while res > tol and it < max_iter:
            Ap = matvec(system, p)
            alpha = rz / float(p @ Ap)
            x += alpha * p
            r -= alpha * Ap
            z = dinv * r
            rz_new = float(r @ z)
            beta = rz_new / rz
            if cycle == 0:
                # Ritz estimates need the coefficients of a single Lanczos run
                alphas.append(alpha)
                betas.append(beta)
            p = z + beta * p
            rz = rz_new
            it += 1
            res = float(np.linalg.norm(r)) / bnorm
    res = float(np.linalg.norm(b - matvec(system, x))) / bnorm
    if res > tol:
        raise ConvergenceError("conjugate gradients did not converge", res, it)
    return _report(system, x, it, res, _ritz_min(alphas, betas, system.diagonal))


def _report(system: DirichletSystem, x: np.ndarray, it: int, res: float, ritz: float) -> SolveReport:
    sol = GridFunction(system.h, -system.J, x)
    if system.g is not None:
        sol = sol + system.g
    return SolveReport(it, res, sol, x.copy(), ritz)


def barrier(R: float, h: float) -> GridFunction:
    """``w_j = 4R^2 - (hj)^2`` for ``|hj| < R``, zero elsewhere."""
    J = interior_radius(R, h)
    x = h * np.arange(-J, J + 1)
    return GridFunction(h, -J, 4.0 * R**2 - x**2)


def barrier_ratio(R: float, h: float, s: float) -> float:
    """``min_{B_R^h} (-Delta_h)^s w / R^{2-2s}`` for the barrier ``w``."""
    w = barrier(R, h)
    lap = frac_laplacian(w, s, window=(w.lo, w.hi))
    return float(np.min(lap.values) / R ** (2.0 - 2.0 * s))


@dataclass(frozen=True)
class MaxPrincipleReport:
    """Maximum-principle bookkeeping on an index window ``B``.

    ``subsolution`` means ``(-Delta_h)^s u <= 0`` on ``B``; then
    ``max_B u <= sup_{Z_h \\ B} u`` must hold (and symmetrically for
    supersolutions with the minimum).
    """

    window: tuple[int, int]
    subsolution: bool
    supersolution: bool
    max_inside: float
    sup_outside: float
    min_inside: float
    inf_outside: float

    @property
    def max_principle_holds(self) -> bool:
        return (not self.subsolution) or self.max_inside <= self.sup_outside

    @property
    def min_principle_holds(self) -> bool:
        return (not self.supersolution) or self.min_inside >= self.inf_outside

    @property
    def holds(self) -> bool:
        return self.max_principle_holds and self.min_principle_holds


def max_principle_check(u: GridFunction, s: float, window, table: KernelTable | None = None,
                        slack: float = 0.0) -> MaxPrincipleReport:
    """Classify ``u`` on ``window`` and record both sides of the maximum principle.

    ``u`` is zero outside its stored values, so the exterior supremum and
    infimum include zero. ``slack`` widens the sub/supersolution tests to
    absorb rounding in ``(-Delta_h)^s u``.
    """
    lo, hi = int(window[0]), int(window[1])
    lap = frac_laplacian(u, s, table, window=(lo, hi)).values
    inside = u.on_window(lo, hi).values
    outside_vals = [0.0]
    if u.lo < lo:
        outside_vals.extend(u.values[: lo - u.lo])
    if u.hi > hi:
        outside_vals.extend(u.values[hi - u.lo + 1 :])
    outside = np.asarray(outside_vals)
    return MaxPrincipleReport(
        (lo, hi),
        bool(np.all(lap <= slack)),
        bool(np.all(lap >= -slack)),
        float(inside.max()),
        float(outside.max()),
        float(inside.min()),
        float(outside.min()),
    )


def apriori_ratio(report: SolveReport, system: DirichletSystem) -> float:
    r"""Fitted constant of :math:`\|u\|_\infty \le C R^{2s}\|f\|_\infty + \|g\|_\infty`.

    Returns :math:`(\|u\|_{\ell^\infty(B_R^h)} - \|g\|_\infty)/(R^{2s}\|f\|_\infty)`.
    """
    fmax = float(np.max(np.abs(system.f.values)))
    gmax = abs(system.g_constant)
    if system.g is not None:
        gmax = max(gmax, float(np.max(np.abs(system.g.values))))
    if fmax == 0.0:
        return 0.0
    umax = float(np.max(np.abs(report.interior)))
    return (umax - gmax) / (system.R ** (2.0 * system.s) * fmax)
