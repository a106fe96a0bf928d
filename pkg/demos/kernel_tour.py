"""Kernel values, their sum, and agreement between the three evaluation routes."""

import math

import numpy as np

from fdlap.kernels import build_table, jump_law, kernel_by_quadrature, kernel_sum, kernel_value, kernel_value_alt

for s in (0.1, 0.5, 0.9):
    m = np.arange(1, 6)
    closed = kernel_value(s, 1.0, m)
    quad = kernel_by_quadrature(s, 1.0, m)
    alt = np.array([kernel_value_alt(s, int(k)) for k in m])
    print(f"s={s}: K(1..5) = {np.array2string(closed, precision=6)}")
    print(f"  quadrature dev {np.max(np.abs(quad / closed - 1)):.1e}, alternate dev {np.max(np.abs(alt / closed - 1)):.1e}")
    table = build_table(s, 1.0, radius=4096)
    print(f"  table sum with tail {table.sum_with_tail():.15f}, closed form {kernel_sum(s):.15f}")
print(f"s=1/2 kernel sum {kernel_sum(0.5):.15f}, 4/pi = {4 / math.pi:.15f}")
law = jump_law(0.5, 50)
print(f"jump law s=1/2: P(1) = {float(law(1)):.6f}, mass beyond 50: {law.tail_mass:.2e}")
