"""Fractional powers of the one-dimensional discrete Laplacian on the mesh ``hZ``.

Submodules
----------
specialfn
    Gamma ratios, scaled Bessel functions, the semidiscrete heat kernel.
kernels
    Pointwise kernels of ``(-Delta_h)^{+-s}``, tables, kernel sums, jump law.
operators
    Applying the operators, three independent oracles, Hölder seminorms,
    bilinear form and Sobolev/Poincaré quantities.
extension
    Semidiscrete extension problem and its Dirichlet-to-Neumann and
    Neumann-to-Dirichlet limits.
dirichlet
    Nonlocal Dirichlet problem on a discrete ball, barrier, maximum principle.
continuum
    Continuous fractional Laplacian, Riesz potentials and the test corpus.
experiments
    Convergence-rate and validation experiments used by the ``fdlap`` CLI.
"""

from .continuum import (RieszSolution, TestFunction, continuous_frac_laplacian, corpus, corpus_by_id,
                        restrict, riesz_potential)
from .dirichlet import ConvergenceError, assemble, max_principle_check, solve
from .extension import dirichlet_to_neumann, extension_constant, neumann_to_dirichlet
from .grid import GridFunction, read_grid_csv
from .kernels import (NEGATIVE, POSITIVE, KernelTable, TailToleranceError, build_table, constant_A,
                      jump_law, kernel_sum, kernel_value)
from .operators import (discrete_laplacian, frac_integral, frac_laplacian, frac_laplacian_by_semigroup,
                        holder_seminorm, multiplier_oracle)
from .quadrature import QuadratureError

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "GridFunction",
    "read_grid_csv",
    "POSITIVE",
    "NEGATIVE",
    "KernelTable",
    "TailToleranceError",
    "QuadratureError",
    "ConvergenceError",
    "build_table",
    "constant_A",
    "jump_law",
    "kernel_sum",
    "kernel_value",
    "discrete_laplacian",
    "frac_laplacian",
    "frac_integral",
    "frac_laplacian_by_semigroup",
    "multiplier_oracle",
    "holder_seminorm",
    "extension_constant",
    "dirichlet_to_neumann",
    "neumann_to_dirichlet",
    "assemble",
    "solve",
    "max_principle_check",
    "TestFunction",
    "RieszSolution",
    "continuous_frac_laplacian",
    "riesz_potential",
    "corpus",
    "corpus_by_id",
    "restrict",
]
