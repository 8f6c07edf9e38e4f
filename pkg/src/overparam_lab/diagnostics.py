"""Empirical probes: sign-flip sparsity under small weight changes, real vs pseudo
network gaps, second-order curvature estimates, and the row-spread norm ratio."""
import csv
import math
from dataclasses import dataclass, astuple, fields

import numpy as np

from .errors import InvalidInput, InvalidParameter
from .networks import ThreeLayerNet, pseudo_forward, sign_pattern
from .numerics import row_lp_norm


@dataclass(frozen=True)
class CouplingReport:
    m1: int
    m2: int
    tau_w: float
    tau_v: float
    seed: int
    flips1: float
    flips2: float
    output_gap: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]


def write_coupling_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CouplingReport.columns())
        for r in reports:
            w.writerow([repr(v) if isinstance(v, float) else v for v in astuple(r)])


def count_sign_flips(net, x, Wpert, Vpert=None, seed=0):
    """Indicator disagreements between init weights and init + perturbation.

    Counts are per input, averaged over the rows of ``x``. ``output_gap`` is
    the mean |F - G| at the perturbed weights, where G keeps the init signs.
    """
    if not isinstance(net, ThreeLayerNet):
        raise InvalidInput("coupling reports need a three-layer net")
    Vpert = np.zeros_like(net.V0) if Vpert is None else Vpert
    if Wpert.shape != net.W0.shape or Vpert.shape != net.V0.shape:
        raise InvalidInput("perturbation shapes do not match the net")
    X = np.atleast_2d(np.asarray(x, dtype=float))
    W, V = net.W0 + Wpert, net.V0 + Vpert
    s0 = sign_pattern(net, X, at="init")
    s1 = sign_pattern(net, X, at="custom", weights=(W, V))
    f1 = np.count_nonzero(s0.dw != s1.dw) / X.shape[0]
    f2 = np.count_nonzero(s0.dv != s1.dv) / X.shape[0]
    real = net.forward(X, W, V)
    pseudo = pseudo_forward(net, X, s0, "full", weights=(W, V))
    gap = float(np.mean(np.abs(real - pseudo)))
    tw = row_lp_norm(Wpert, 4)
    tv = row_lp_norm(Vpert, 2)
    return CouplingReport(net.m1, net.m2, tw, tv, int(seed), float(f1), float(f2), gap)


def worst_case_perturbation(net, x, tau_w, margin=1e-3):
    """Perturbation with ||W'||_{2,4} <= tau_w flipping as many layer-1 signs at ``x`` as possible.

    Flipping neuron i costs |z_i|^4 (1 + margin)^4 under the (2,4) budget,
    where z_i is its init preactivation, so the cheapest neurons go first.
    Row i becomes -z_i (1 + margin) x / |x|^2.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInput("worst-case perturbation is built for one input")
    z = net.W0 @ x + net.b1
    order = np.argsort(np.abs(z), kind="stable")
    cost = np.cumsum((np.abs(z[order]) * (1 + margin)) ** 4)
    n = int(np.searchsorted(cost, tau_w ** 4, side="right"))
    pert = np.zeros_like(net.W0)
    idx = order[:n]
    pert[idx] = np.outer(-z[idx] * (1 + margin), x) / float(x @ x)
    return pert


def random_perturbation(shape, tau, rng, p=4):
    """Gaussian matrix rescaled to row-(2,p) norm ``tau``."""
    G = rng.standard_normal(shape)
    return G * (tau / row_lp_norm(G, p)) if tau > 0 else np.zeros(shape)


def flip_scaling(net_factory, widths, tau_w, seeds, rng_for, x_for, mode="worst"):
    """Median layer-1 flip counts per width and the log-log slope.

    ``net_factory(m1, seed)`` builds a net; ``x_for(net, seed)`` gives one
    unit input; ``rng_for(m1, seed)`` feeds random perturbations.
    """
    medians = []
    for m1 in widths:
        counts = []
        for seed in seeds:
            net = net_factory(m1, seed)
            x = x_for(net, seed)
            if mode == "worst":
                Wp = worst_case_perturbation(net, x, tau_w)
            else:
                Wp = random_perturbation(net.W0.shape, tau_w, rng_for(m1, seed))
            counts.append(count_sign_flips(net, x, Wp, seed=seed).flips1)
        medians.append(float(np.median(counts)))
    if min(medians) <= 0:
        return medians, float("nan")
    slope = float(np.polyfit(np.log(widths), np.log(medians), 1)[0])
    return medians, slope


@dataclass(frozen=True)
class CurvatureProbe:
    direction: np.ndarray
    eta: float
    estimate: float
    stderr: float


def curvature_probe(objective, point, direction, eta, samples=1, seed=0, stochastic=False):
    """Mean of [f(x + sqrt(eta) d) + f(x - sqrt(eta) d) - 2 f(x)] / eta.

    For a stochastic objective ``objective(point, rng)`` each sample uses
    one random stream for all three evaluations (common random numbers).
    """
    if eta <= 0:
        raise InvalidParameter("eta must be positive")
    d = np.asarray(direction, dtype=float)
    if not math.isclose(float(np.linalg.norm(d)), 1.0, rel_tol=1e-9):
        raise InvalidParameter("direction must be unit norm")
    x = np.asarray(point, dtype=float)
    h = math.sqrt(eta)
    vals = []
    for s in range(samples):
        if stochastic:
            def f(p):
                return objective(p, np.random.default_rng([seed, s]))
        else:
            f = objective
        vals.append((f(x + h * d) + f(x - h * d) - 2 * f(x)) / eta)
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return CurvatureProbe(d, eta, float(vals.mean()), se)


def norm_ratio(W):
    """m ||W||_{2,4}^4 / ||W||_F^4: 1 for equal row norms, m for a single nonzero row."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    sq = np.sum(W * W, axis=1)
    tot = float(sq.sum())
    if tot == 0:
        raise InvalidInput("norm ratio of a zero matrix")
    return W.shape[0] * float(np.sum(sq * sq)) / (tot * tot)


def generalization_gap(log):
    if not log.records:
        raise InvalidInput("log has no records")
    tr, te = log.records[-1]["train_loss"], log.records[-1]["test_loss"]
    if not (np.isfinite(tr) and np.isfinite(te)):
        raise InvalidInput("log lacks finite train and test losses")
    return te - tr
