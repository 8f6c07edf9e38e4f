"""
A tiny random set with a prescribed signed mean
===============================================

For each y in [-1, 1] the partition gives a set I(y) of Gaussian mass tau
and signs s(y, g) so that E[s g | g in I(y)] = y. Small y use one interval
around 0 with a sign split; larger y use two mirrored intervals.
"""

import numpy as np

from overparam_lab import build_interval_partition
from overparam_lab.construct import check_interval_partition
from overparam_lab.numerics import make_rng

part = build_interval_partition(0.01)
print(f"c = {part.c:.6f}, regimes meet at y0 = {part.y0:.6f}")
for y in (-0.8, 0.0, 0.004, 0.3, 1.0):
    pieces = ", ".join(f"[{lo:+.4f}, {hi:+.4f}] s={s:+d}" for lo, hi, s in part.pieces(y))
    print(f"y={y:+.3f}: {pieces}")

report = check_interval_partition(part)
print({k: report[k] for k in ("balanced", "symmetric", "unbiased", "max_span", "lipschitz_K")})

#############################################################################
# Monte Carlo agrees with the quadrature.
g = make_rng(0).standard_normal(2_000_000)
for y in (0.004, 0.3):
    s = part.sign(y, g)
    inside = s != 0
    print(f"y={y}: mass {inside.mean():.4f}, signed mean {np.mean((s * g)[inside]):.4f}")
