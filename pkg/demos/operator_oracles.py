"""Three independent evaluations of (-Delta_h)^s on a random compact vector, and the limits in s."""

import numpy as np

from fdlap.grid import GridFunction
from fdlap.operators import discrete_laplacian, frac_laplacian, frac_laplacian_by_semigroup, multiplier_oracle

rng = np.random.default_rng(1)
u = GridFunction(0.5, -32, rng.uniform(-1, 1, 64))
w = (u.lo - 32, u.hi + 32)
for s in (0.25, 0.75):
    a = frac_laplacian(u, s, window=w).values
    b = frac_laplacian_by_semigroup(u, s, window=w).values
    c = multiplier_oracle(u, s, window=w).values
    print(f"s={s}: kernel vs semigroup {np.max(np.abs(a - b)):.1e}, kernel vs multiplier {np.max(np.abs(a - c)):.1e}")

v = GridFunction(1.0, -3, rng.uniform(-1, 1, 7))
w = (-400, 400)
ident, lap = v.on_window(*w).values, discrete_laplacian(v).on_window(*w).values
for s in (0.1, 0.05, 0.01):
    print(f"s={s}: sup |(-Delta)^s v - v| = {np.max(np.abs(frac_laplacian(v, s, window=w).values - ident)):.4f}")
for s in (0.9, 0.95, 0.99):
    print(f"s={s}: sup |(-Delta)^s v - (-Delta) v| = {np.max(np.abs(frac_laplacian(v, s, window=w).values - lap)):.4f}")
