"""Discrete vs continuous operator on the Hölder corpus, including a pre-asymptotic case.

The c1_0.6 entry at s=0.2 compares forward differences with the continuous
derivative; over h = 2^-3..2^-9 its slope has not settled, so the report
says "rate not established" instead of pass or fail.
"""

from fdlap.experiments import ExperimentConfig, run_comparison

runs = [
    ExperimentConfig(s=[0.1, 0.2], corpus=["holder_0.6", "holder_0.9"], h=list(range(3, 10))),
    ExperimentConfig(s=[0.3, 0.4], corpus=["c1_0.3"], h=list(range(3, 10))),
    ExperimentConfig(s=[0.2], corpus=["c1_0.6"], h=list(range(3, 10))),
]
for cfg in runs:
    for r in run_comparison(cfg):
        exp = "n/a" if r.expected is None else f"{r.expected:.2f}"
        print(f"{r.case:14s} s={r.s}: slope {r.slope:.3f}, expected {exp}, residual {r.residual:.3f} -> {r.status}")
