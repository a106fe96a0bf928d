"""Extension-problem traces on a delta: Dirichlet-to-Neumann and Neumann-to-Dirichlet limits."""

import numpy as np

from fdlap.extension import dirichlet_to_neumann, extension_constant, neumann_to_dirichlet
from fdlap.grid import GridFunction
from fdlap.operators import frac_integral, frac_laplacian

delta = GridFunction.delta(1.0)
win = (-8, 8)
for s in (0.2, 0.4):
    kappa = extension_constant(s)
    dtn, _ = dirichlet_to_neumann(delta, s, window=win)
    ntd, _ = neumann_to_dirichlet(delta, s, window=win)
    e1 = np.max(np.abs(dtn.values - kappa * frac_laplacian(delta, s, window=win).values))
    e2 = np.max(np.abs(ntd.values - frac_integral(delta, s, window=win).values / kappa))
    print(f"s={s}: kappa {kappa:.6f}, DtN deviation {e1:.1e}, NtD deviation {e2:.1e}")
