"""Dirichlet solutions against the Riesz potential, plus an empirical boundary exponent.

The boundary exponent is a report only: near the ball edge the solution of
(-Delta_h)^s u = 1 with zero exterior data grows like dist^e, and the fitted
e is printed next to s for comparison.
"""

import numpy as np

from fdlap.dirichlet import assemble, solve
from fdlap.experiments import ExperimentConfig, fit_rate, run_dirichlet_convergence

(rep,) = run_dirichlet_convergence(ExperimentConfig(s=[0.2], alpha=[0.3], h=[3, 4, 5, 6, 7]))
for h, e, R, it in zip(rep.hs, rep.errors, rep.Rs, rep.diagnostics["iterations"]):
    print(f"h={h:.5f} R={R:6.3f} normalised error {e:.3e} CG iterations {it}")
print(f"slope {rep.slope:.3f} (band {rep.band[0]:.2f}..{rep.band[1]:.2f}) -> {rep.status}")

for s in (0.2, 0.5, 0.8):
    h, R = 2.0**-10, 1.0
    u = solve(assemble(s, h, R, 1.0)).interior
    # distances from the right edge, one to sixty-four mesh cells
    d = np.array([2**k for k in range(0, 7)])
    vals = u[-d]
    slope, _, _ = fit_rate(h * d[::-1], vals[::-1])
    print(f"s={s}: empirical boundary exponent {slope:.3f}")
