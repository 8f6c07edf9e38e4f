"""
How many ReLUs change sign under a small weight change?
=======================================================

Perturb the first layer of a random three-layer net by a matrix of row-(2,4)
norm tau and count first-layer indicator flips at one input. The cheapest
flips are the neurons whose preactivation is already near zero, so the
worst-case count grows like m^(6/5) at fixed tau; random directions flip
fewer.
"""

import numpy as np

from overparam_lab import count_sign_flips, init_three_layer, pseudo_forward, sign_pattern
from overparam_lab.diagnostics import random_perturbation, worst_case_perturbation
from overparam_lab.numerics import make_rng, unit_rows

tau = 0.02
x = unit_rows(make_rng(0).standard_normal(4))

for m1 in (1000, 4000, 16000):
    net = init_three_layer(m1, 16, 4, 1, seed=1)
    worst = count_sign_flips(net, x, worst_case_perturbation(net, x, tau))
    rand = count_sign_flips(net, x, random_perturbation(net.W0.shape, tau, make_rng(2)))
    print(f"m1={m1:6d}  worst-case flips {worst.flips1:6.0f}  random flips {rand.flips1:5.0f}  "
          f"pseudo gap {worst.output_gap:.2e}")

#############################################################################
# With the signs frozen at the current weights the pseudo network is the
# real network, exactly.
net = init_three_layer(200, 100, 4, 1, seed=3)
net.Wdelta = 0.1 * make_rng(4).standard_normal(net.W0.shape)
X = unit_rows(make_rng(5).standard_normal((10, 4)))
frozen = sign_pattern(net, X, at="current")
print("max |pseudo - real| =", np.max(np.abs(pseudo_forward(net, X, frozen) - net.forward(X))))
