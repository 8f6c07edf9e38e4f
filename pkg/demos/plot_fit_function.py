"""
Writing sin(3x) as a Gaussian average of an indicator
=====================================================

For alpha, beta, b0 ~ N(0, 1) we want a bounded h with

    E[ 1{alpha x + beta sqrt(1 - x^2) + b0 >= 0} h(alpha, b0) ] ~= sin(3 x)

for every x in [-1, 1]. ``build_fit_function`` builds h from Hermite
polynomials, and ``verify_fit_function`` checks the identity by Monte Carlo.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from overparam_lab import build_fit_function, verify_fit_function
from overparam_lab.targets import sin_activation

phi = sin_activation(3.0)
h = build_fit_function(phi, eps=0.05)
print("bound C =", round(h.C, 1), " E[h^2] =", round(h.second_moment, 1))
print("calibration:", {k: round(v, 4) for k, v in h.calibration.items()})

grid = np.linspace(-1, 1, 21)
rep = verify_fit_function(h, phi, grid, samples=400_000, seed=0)
print(f"max residual {rep.max_residual:.3f}, typical std-err {np.median(rep.stderr):.3f}")

#############################################################################
# Estimate with 3 std-err bars against the target.
fig, ax = plt.subplots(figsize=(5, 3.5))
xs = np.linspace(-1, 1, 200)
ax.plot(xs, phi(xs), "k-", lw=1, label="sin(3x)")
ax.errorbar(grid, rep.estimate, yerr=3 * np.asarray(rep.stderr), fmt="o", ms=3, label="Monte Carlo")
ax.set_xlabel("x1")
ax.legend()
fig.tight_layout()
fig.savefig("fit_sin3.png", dpi=120)
