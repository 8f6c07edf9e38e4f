"""
Wide ReLU nets vs kernel baselines on a tiny grid
=================================================

Trains every architecture on the sin/cos target in R^4 at two widths and
plots the final test loss. This is a one-minute version of
``configs/fig1a.yaml``; the real sweep goes through ``overparam-lab sweep``.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from overparam_lab.config import config_from_dict
from overparam_lab.harness import run_sweep

#############################################################################
# The config is the same YAML schema the CLI reads, given here as a dict.
cfg = config_from_dict({
    "task": "fig1a-sweep-m",
    "archs": ["2layer", "2layer-last", "3layer", "3layer-last", "3layer-ntk"],
    "seeds": [0],
    "data": {"target": "sin-fig1", "m": [100, 1000], "N": [500]},
    "sgd": {"epochs": 100, "eval_every": 50,
            "lr_grid_by_arch": {"2layer": [0.01], "2layer-last": [0.2], "3layer": [0.005],
                                "3layer-last": [0.2], "3layer-ntk": [0.002]}},
    "out": "demo_out/width",
})
summary = run_sweep(cfg)

#############################################################################
# One curve per architecture. The trivial predictor (always 0) scores
# about 16 here, so the last-layer baselines barely beat it.
fig, ax = plt.subplots(figsize=(5, 3.5))
for arch in cfg.archs:
    ms = cfg.data.m
    ax.plot(ms, [summary.median(arch, m=m) for m in ms], marker="o", label=arch)
ax.set_xscale("log")
ax.set_xlabel("width m")
ax.set_ylabel("test loss")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig("demo_out/width/comparison.png", dpi=120)

for r in summary.records:
    print(f"{r['arch']:12s} m={r['m']:<4d} test {r['median_test_loss']:.3f}")
