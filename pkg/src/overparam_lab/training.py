"""Losses, the three-layer regularized/smoothed objectives, and the SGD loops.

Two training modes exist and are selected explicitly through ``SGDConfig.mode``:

* ``"theory"`` follows the algorithms literally: one sample per step, no
  momentum; three-layer training runs ``outer_rounds`` rounds of noisy SGD
  on the smoothed objective, shrinking the output scale lambda by
  ``(1 - eta)`` after each round, and finishes with the best-of-J noise
  selection.
* ``"experiment"`` is the practical recipe: mini-batches, heavy-ball momentum,
  PyTorch-style weight decay on the full hidden weights, and a x10 learning
  rate drop half way through.
"""
import csv
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import Diverged, InvalidParameter
from .numerics import make_rng, row_lp_norm, sample_sign_diagonal

# ---------------------------------------------------------------- losses

LOSS_KINDS = ("l2-regression", "squared", "logistic")


@dataclass(frozen=True)
class LossFn:
    """Per-sample loss L(p, y) on (n, k) predictions.

    ``l2-regression`` is the Huber form 1/2|e|^2 for |e| <= 1 and |e| - 1/2
    beyond, which is convex, 1-Lipschitz and 1-smooth. ``squared`` is the
    plain 1/2|e|^2 used by the experiments; it is not globally Lipschitz.
    ``logistic`` takes labels in {-1, +1} (k = 1) or class indices (k > 1).
    """

    kind: str = "l2-regression"

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise InvalidParameter(f"unknown loss {self.kind!r}")

    @property
    def satisfies_contract(self):
        return self.kind != "squared"

    def value(self, P, Y):
        P = np.atleast_2d(P)
        if self.kind == "logistic":
            return _logistic(P, Y)[0]
        E = P - np.atleast_2d(Y)
        r = np.linalg.norm(E, axis=1)
        if self.kind == "squared":
            return 0.5 * r * r
        return np.where(r <= 1.0, 0.5 * r * r, r - 0.5)

    def grad(self, P, Y):
        P = np.atleast_2d(P)
        if self.kind == "logistic":
            return _logistic(P, Y)[1]
        E = P - np.atleast_2d(Y)
        if self.kind == "squared":
            return E
        r = np.linalg.norm(E, axis=1, keepdims=True)
        return E / np.maximum(r, 1.0)

    def mean(self, P, Y):
        return float(np.mean(self.value(P, Y)))


def _logistic(P, Y):
    Y = np.asarray(Y)
    if P.shape[1] == 1:
        y = Y.reshape(-1)
        z = -y * P[:, 0]
        val = np.logaddexp(0.0, z)
        g = (-y / (1.0 + np.exp(-z)))[:, None]
        return val, g
    cls = Y.reshape(-1).astype(int)
    Z = P - P.max(axis=1, keepdims=True)
    lse = np.log(np.exp(Z).sum(axis=1))
    val = lse - Z[np.arange(len(cls)), cls]
    S = np.exp(Z - lse[:, None])
    S[np.arange(len(cls)), cls] -= 1.0
    return val, S


def loss_eval(loss, pred, label):
    single = np.ndim(pred) == 1
    v = loss.value(pred, label)
    return float(v[0]) if single else v


def loss_grad(loss, pred, label):
    single = np.ndim(pred) == 1
    g = loss.grad(pred, label)
    return g[0] if single else g


# ---------------------------------------------------------------- regularizer and objectives


@dataclass(frozen=True)
class RegParams:
    lambda_w: float = 0.0
    lambda_v: float = 0.0

    def __post_init__(self):
        if self.lambda_w < 0 or self.lambda_v < 0:
            raise InvalidParameter("regularizer weights must be nonnegative")


@dataclass(frozen=True)
class SmoothingParams:
    sigma_w: float = 0.0
    sigma_v: float = 0.0
    resample: str = "per-step"

    def __post_init__(self):
        if self.sigma_w < 0 or self.sigma_v < 0:
            raise InvalidParameter("smoothing scales must be nonnegative")


def regularizer(net, reg, Wd=None, Vd=None):
    """lambda_w ||sqrt(lam) W'||_{2,4}^4 + lambda_v ||sqrt(lam) V'||_F^2."""
    Wd = net.Wdelta if Wd is None else Wd
    Vd = net.Vdelta if Vd is None else Vd
    lam = net.lam
    rw = np.sum(np.sum(Wd * Wd, axis=1) ** 2)
    return float(reg.lambda_w * lam * lam * rw + reg.lambda_v * lam * np.sum(Vd * Vd))


def regularizer_grad(net, reg, Wd=None, Vd=None):
    Wd = net.Wdelta if Wd is None else Wd
    Vd = net.Vdelta if Vd is None else Vd
    lam = net.lam
    gW = reg.lambda_w * lam * lam * 4.0 * np.sum(Wd * Wd, axis=1, keepdims=True) * Wd
    gV = reg.lambda_v * lam * 2.0 * Vd
    return gW, gV


@dataclass
class SmoothingNoise:
    """One realization of the smoothing matrices and (optionally) the sign diagonal."""

    Wrho: np.ndarray
    Vrho: np.ndarray
    sigma: np.ndarray = None


def draw_noise(net, smoothing, rng, sign_rng=None, sign_mode="random"):
    Wrho = rng.standard_normal(net.W0.shape) * smoothing.sigma_w if smoothing.sigma_w > 0 else np.zeros_like(net.W0)
    Vrho = rng.standard_normal(net.V0.shape) * smoothing.sigma_v if smoothing.sigma_v > 0 else np.zeros_like(net.V0)
    sigma = None
    if sign_rng is not None:
        sigma = np.ones(net.m1) if sign_mode == "identity" else sample_sign_diagonal(net.m1, sign_rng)
    return SmoothingNoise(Wrho, Vrho, sigma)


def _effective_weights(net, noise, Wd=None, Vd=None):
    Wd = net.Wdelta if Wd is None else Wd
    Vd = net.Vdelta if Vd is None else Vd
    if noise.sigma is not None:
        Wd = noise.sigma[:, None] * Wd
        Vd = Vd * noise.sigma[None, :]
    return net.W0 + noise.Wrho + Wd, net.V0 + noise.Vrho + Vd


def _objective(net, X, Y, loss, reg, noise):
    W, V = _effective_weights(net, noise)
    P = net.forward(X, W, V)
    n = P.shape[0]
    value = loss.mean(P, Y) + regularizer(net, reg)
    G = loss.grad(P, Y) / n
    dW, dV = net.backward(X, G, W, V)
    if noise.sigma is not None:
        dW = noise.sigma[:, None] * dW
        dV = dV * noise.sigma[None, :]
    gW, gV = regularizer_grad(net, reg)
    return value, (dW + gW, dV + gV)


def objective_L1(net, sample, reg, smoothing, rng=None, noise=None, loss=None):
    """Smoothed, regularized loss at one sample (or batch) and its gradient in (W', V').

    Fresh W^rho, V^rho are drawn from ``rng`` unless a frozen ``noise`` is given.
    Returns ``(value, (dW, dV))``.
    """
    X, Y = sample
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if noise is None:
        noise = draw_noise(net, smoothing, rng)
    return _objective(net, X, Y, loss or LossFn(), reg, noise)


def objective_L2(net, sample, reg, smoothing, sigma=None, rng=None, noise=None, sign_rng=None, loss=None):
    """As :func:`objective_L1` with increments entering as Sigma W' and V' Sigma."""
    X, Y = sample
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    if noise is None:
        noise = draw_noise(net, smoothing, rng)
    if sigma is None:
        sigma = sample_sign_diagonal(net.m1, sign_rng if sign_rng is not None else rng)
    noise = SmoothingNoise(noise.Wrho, noise.Vrho, np.asarray(sigma, dtype=float))
    return _objective(net, X, Y, loss or LossFn(), reg, noise)


# ---------------------------------------------------------------- configuration and logs


@dataclass
class SGDConfig:
    eta: float = 0.01
    mode: str = "experiment"
    epochs: int = 200
    batch_size: int = 50
    momentum: float = 0.9
    weight_decay: float = 0.0
    reg24: float = 0.0
    lr_drop_at: float = 0.5
    lr_drop_factor: float = 10.0
    steps: int = 1000
    outer_rounds: int = 10
    inner_steps: int = 100
    noise_scale: float = None
    j_star_samples: int = 16
    sign_mode: str = "random"
    log_every: int = 0
    eval_every: int = 1
    dtype: str = "float64"

    def __post_init__(self):
        if not self.eta >= 0:
            raise InvalidParameter("eta must be nonnegative")
        if self.mode not in ("theory", "experiment"):
            raise InvalidParameter(f"unknown mode {self.mode!r}")
        if self.batch_size < 1:
            raise InvalidParameter("batch size must be >= 1")
        if not 0 <= self.momentum < 1:
            raise InvalidParameter("momentum must lie in [0, 1)")

    @property
    def perturbation(self):
        return self.eta if self.noise_scale is None else self.noise_scale


@dataclass
class TrainLog:
    records: list = field(default_factory=list)
    status: str = "ok"
    final: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def add(self, epoch, train_loss, test_loss=float("nan"), lam=1.0, reg_value=0.0, grad_norm=float("nan")):
        if self.records and epoch <= self.records[-1]["epoch"]:
            raise InvalidParameter("epochs must increase")
        self.records.append(dict(epoch=epoch, train_loss=float(train_loss), test_loss=float(test_loss),
                                 lam=float(lam), reg_value=float(reg_value), grad_norm=float(grad_norm)))

    @property
    def final_train_loss(self):
        return self.records[-1]["train_loss"] if self.records else float("nan")

    @property
    def final_test_loss(self):
        return self.records[-1]["test_loss"] if self.records else float("nan")

    CSV_COLUMNS = ("run_id", "seed", "arch", "variant", "m", "N", "epoch", "train_loss", "test_loss",
                   "lambda", "reg_value", "lr", "wd")

    def rows(self, run_id, seed, arch, variant, m, N, lr, wd):
        for r in self.records:
            yield [run_id, seed, arch, variant, m, N, r["epoch"], repr(r["train_loss"]), repr(r["test_loss"]),
                   repr(r["lam"]), repr(r["reg_value"]), repr(float(lr)), repr(float(wd))]

    def to_csv(self, path, **meta):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.CSV_COLUMNS)
            w.writerows(self.rows(**meta))


def _check_finite(value, log):
    if not np.isfinite(value) or abs(value) > 1e30:
        log.status = "diverged"
        raise Diverged(f"non-finite loss {value}")


def _split_rng(rng, n):
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(int(rng))
    seeds = rng.integers(0, 2 ** 63 - 1, size=n)
    return [np.random.default_rng(int(s)) for s in seeds]


class _Momentum:
    """Heavy-ball SGD with the PyTorch update: buf = mu*buf + g; p -= lr*buf."""

    def __init__(self, mu):
        self.mu = mu
        self.buf = {}

    def step(self, name, param, grad, lr, mirror=None):
        """Update ``param`` (and ``mirror``) in place; ``grad`` may be overwritten."""
        if self.mu:
            b = self.buf.get(name)
            if b is None:
                b = self.buf[name] = grad.copy()
            else:
                b *= self.mu
                b += grad
            grad = np.multiply(b, lr, out=grad)
        else:
            grad *= lr
        param -= grad
        if mirror is not None:
            mirror -= grad


def _lr_at(cfg, epoch):
    if cfg.lr_drop_at and epoch >= int(round(cfg.lr_drop_at * cfg.epochs)):
        return cfg.eta / cfg.lr_drop_factor
    return cfg.eta


def _due(cfg, epoch):
    return (epoch + 1) % max(cfg.eval_every, 1) == 0 or epoch + 1 == cfg.epochs


def _batches(N, batch_size, rng):
    perm = rng.permutation(N)
    for s in range(0, N, batch_size):
        yield perm[s : s + batch_size]


def _penalty(cfg, gW, W, gV=None, V=None):
    """Add weight decay / the (2,4) penalty on the full weights to the gradients in place."""
    if cfg.weight_decay:
        if gV is not None:
            gV += cfg.weight_decay * V
        if not cfg.reg24:
            gW += cfg.weight_decay * W
    if cfg.reg24:
        gW += cfg.reg24 * 4.0 * np.sum(W * W, axis=1, keepdims=True) * W


def _two_layer_grad(net, X, Y, loss, cfg, W=None):
    W = net.W if W is None else W
    _, g = net.predict_and_grad(X, lambda P: loss.grad(P, Y) / X.shape[0], W)
    _penalty(cfg, g, W)
    return g


def _eval(net, data, loss):
    if data is None:
        return float("nan")
    return loss.mean(net.forward(data.inputs), data.labels)


def sgd_two_layer(net, data, loss, cfg, rng, test=None):
    """SGD on the increments W' of a two-layer net; ``a`` and ``b`` stay frozen."""
    log = TrainLog()
    X, Y = data.inputs, data.labels
    N = len(data)
    if cfg.mode == "theory":
        data_rng, = _split_rng(rng, 1)
        every = cfg.log_every or N
        for t in range(1, cfg.steps + 1):
            i = data_rng.integers(N)
            g = _two_layer_grad(net, X[i : i + 1], Y[i : i + 1], loss, cfg)
            net.Wdelta -= cfg.eta * g
            if t % every == 0 or t == cfg.steps:
                tr = _eval(net, data, loss)
                _check_finite(tr, log)
                log.add(t / N, tr, _eval(net, test, loss), grad_norm=np.linalg.norm(g))
        return log
    return _experiment_epochs(net, data, loss, cfg, rng, test, log)


# ---------------------------------------------------------------- noisy SGD


def noisy_sgd(grad_fn, params, eta, steps, noise_scale, rng, value_fn=None):
    """Perturbed SGD on a dict of arrays: p <- p - eta*g + xi, |xi| ~ noise_scale.

    ``xi`` is isotropic Gaussian over all coordinates jointly with expected
    squared norm ``noise_scale**2``. ``grad_fn(params)`` returns a matching
    dict of (stochastic) gradients. Returns the objective trace when
    ``value_fn`` is given.
    """
    total = sum(p.size for p in params.values())
    std = noise_scale / math.sqrt(total) if total else 0.0
    trace = []
    for _ in range(steps):
        grads = grad_fn(params)
        for name, p in params.items():
            p -= eta * grads[name]
            if std > 0:
                p += std * rng.standard_normal(p.shape)
        if value_fn is not None:
            trace.append(float(value_fn(params)))
    return trace


def noisy_sgd_inner(net, data, objective, cfg, T_w, rng, reg=None, smoothing=None, loss=None, trace=None):
    """``T_w`` noisy SGD steps on L1 or L2 at fixed lambda; mutates and returns ``net``.

    ``rng`` is either one generator or a sequence of five generators
    (data, smoothing, signs, perturbation, spare) so that callers can share
    randomness across variants.
    """
    reg = reg or RegParams()
    smoothing = smoothing or SmoothingParams()
    loss = loss or LossFn("l2-regression")
    streams = rng if isinstance(rng, (list, tuple)) else _split_rng(rng, 5)
    data_rng, noise_rng, sign_rng, pert_rng = streams[:4]
    X, Y = data.inputs, data.labels
    N = len(data)
    params = {"W": net.Wdelta, "V": net.Vdelta}
    last = {}

    def grad_fn(_):
        idx = data_rng.integers(N, size=cfg.batch_size if cfg.batch_size > 1 else 1)
        noise = draw_noise(net, smoothing, noise_rng,
                           sign_rng if objective == "L2" else None, cfg.sign_mode)
        value, (gW, gV) = _objective(net, X[idx], Y[idx], loss, reg, noise)
        if not np.isfinite(value):
            raise Diverged(f"non-finite objective {value}")
        last["value"] = value
        return {"W": gW, "V": gV}

    values = noisy_sgd(grad_fn, params, cfg.eta, T_w, cfg.perturbation, pert_rng,
                       value_fn=lambda _: last["value"])
    if trace is not None:
        trace.extend(values)
    return net


def select_j_star(losses):
    """Index of the smallest loss; ties go to the smallest index."""
    return int(np.argmin(np.asarray(losses, dtype=float)))


def _three_layer_grad(net, X, Y, loss, cfg, W=None, V=None):
    W = net.W if W is None else W
    V = net.V if V is None else V
    _, gW, gV = net.predict_and_grad(X, lambda P: loss.grad(P, Y) / X.shape[0], W, V)
    _penalty(cfg, gW, W, gV, V)
    return gW, gV


def _experiment_epochs(net, data, loss, cfg, rng, test, log):
    """Mini-batch momentum SGD over epochs on the hidden increments of ``net``.

    Works on a copy in ``cfg.dtype`` with the full weights kept alongside the
    increments, and writes the increments back at the end.
    """
    dt = np.dtype(cfg.dtype)
    three = hasattr(net, "V0")
    work = net if net.W0.dtype == dt else net.astype(dt)
    X, Y = data.inputs.astype(dt), data.labels.astype(dt)
    tX = None if test is None else test.inputs.astype(dt)
    tY = None if test is None else test.labels.astype(dt)
    full = {"W": work.W}
    deltas = {"W": work.Wdelta}
    if three:
        full["V"], deltas["V"] = work.V, work.Vdelta

    def ev(A, B):
        return float("nan") if A is None else float(loss.mean(work.forward(A, *full.values()), B))

    data_rng, = _split_rng(rng, 1)
    opt = _Momentum(cfg.momentum)
    log.add(0, ev(X, Y), ev(tX, tY))
    for epoch in range(cfg.epochs):
        lr = _lr_at(cfg, epoch)
        for idx in _batches(len(data), cfg.batch_size, data_rng):
            if three:
                grads = dict(zip(("W", "V"), _three_layer_grad(work, X[idx], Y[idx], loss, cfg, full["W"], full["V"])))
            else:
                grads = {"W": _two_layer_grad(work, X[idx], Y[idx], loss, cfg, full["W"])}
            gn = math.sqrt(sum(float(np.vdot(g, g)) for g in grads.values()))
            _check_finite(gn, log)
            for name, g in grads.items():
                opt.step(name, deltas[name], g, lr, mirror=full[name])
        if _due(cfg, epoch):
            tr = ev(X, Y)
            _check_finite(tr, log)
            log.add(epoch + 1, tr, ev(tX, tY), grad_norm=gn)
    if work is not net:
        net.Wdelta[...] = work.Wdelta
        if three:
            net.Vdelta[...] = work.Vdelta
    return log


def sgd_three_layer(net, data, loss, variant, reg, smoothing, cfg, rng, test=None):
    """Train a three-layer net.

    Theory mode runs ``cfg.outer_rounds`` rounds of ``cfg.inner_steps`` noisy
    SGD steps on L1 (``variant="v1"``) or L2 (``"v2"``), applies
    lambda <- (1 - eta) lambda after each round, then draws
    ``cfg.j_star_samples`` smoothing pairs and keeps the one with the lowest
    training loss. The chosen output weights are in ``log.final``.

    In experiment mode ``cfg.weight_decay`` acts on V and, unless
    ``cfg.reg24`` is set, on W; ``cfg.reg24`` instead adds
    reg24 * ||W||_{2,4}^4 for W.
    """
    if variant not in ("v1", "v2"):
        raise InvalidParameter(f"unknown variant {variant!r}")
    log = TrainLog()
    X, Y = data.inputs, data.labels
    N = len(data)
    if cfg.mode == "experiment":
        return _experiment_epochs(net, data, loss, cfg, rng, test, log)

    streams = _split_rng(rng, 6)
    objective = "L1" if variant == "v1" else "L2"
    for t in range(1, cfg.outer_rounds + 1):
        noisy_sgd_inner(net, data, objective, cfg, cfg.inner_steps, streams[:5], reg, smoothing, loss, log.trace)
        net.lam = net.lam * (1.0 - cfg.eta)
        tr = _eval(net, data, loss)
        _check_finite(tr, log)
        log.add(t, tr, _eval(net, test, loss), lam=net.lam, reg_value=regularizer(net, reg))

    sel_rng = streams[5]
    sign_hat = None
    if variant == "v2":
        sign_hat = np.ones(net.m1) if cfg.sign_mode == "identity" else sample_sign_diagonal(net.m1, sel_rng)
    losses, cands = [], []
    for _ in range(cfg.j_star_samples):
        noise = draw_noise(net, smoothing, sel_rng)
        noise.sigma = sign_hat
        W, V = _effective_weights(net, noise)
        losses.append(loss.mean(net.forward(X, W, V), Y))
        cands.append((W, V))
    j = select_j_star(losses)
    W_out, V_out = cands[j]
    log.final = dict(j_star=j, j_losses=losses, W_out=W_out, V_out=V_out, lam=net.lam, sign_hat=sign_hat,
                     test_loss=float("nan") if test is None else loss.mean(net.forward(test.inputs, W_out, V_out), test.labels))
    return log


# ---------------------------------------------------------------- kernel baselines


def train_linear_baseline(fmap, data, loss, cfg, rng, test=None):
    """SGD on the linear weights of a feature map (conjugate kernel or NTK).

    Uses the same schedule as the networks. ``log.final["theta"]`` holds the
    learned weights.
    """
    log = TrainLog()
    data_rng, = _split_rng(rng, 1)
    theta = fmap.theta0.copy()
    dt = theta.dtype
    cache = fmap.prepare(data.inputs.astype(dt))
    tcache = fmap.prepare(test.inputs.astype(dt)) if test is not None else None
    Y = data.labels.astype(dt)
    N = len(data)

    def ev(c, Yc):
        return float("nan") if c is None else float(loss.mean(fmap.predict(c, theta), Yc))

    def grad(idx):
        sub = {k: v[idx] for k, v in cache.items()}
        P = fmap.predict(sub, theta)
        g = fmap.vjp(sub, loss.grad(P, Y[idx]) / len(idx))
        if cfg.weight_decay:
            g = g + cfg.weight_decay * theta
        return g

    test_Y = None if test is None else test.labels.astype(dt)
    if cfg.mode == "theory":
        every = cfg.log_every or N
        for t in range(1, cfg.steps + 1):
            g = grad(data_rng.integers(N, size=1))
            theta -= cfg.eta * g
            if t % every == 0 or t == cfg.steps:
                tr = ev(cache, Y)
                _check_finite(tr, log)
                log.add(t / N, tr, ev(tcache, test_Y), grad_norm=np.linalg.norm(g))
        log.final["theta"] = theta
        return log
    opt = _Momentum(cfg.momentum)
    log.add(0, ev(cache, Y), ev(tcache, test_Y))
    for epoch in range(cfg.epochs):
        lr = _lr_at(cfg, epoch)
        for idx in _batches(N, cfg.batch_size, data_rng):
            g = grad(idx)
            gn = float(np.linalg.norm(g))
            _check_finite(gn, log)
            opt.step("theta", theta, g, lr)
        if _due(cfg, epoch):
            tr = ev(cache, Y)
            _check_finite(tr, log)
            log.add(epoch + 1, tr, ev(tcache, test_Y), grad_norm=gn)
    log.final["theta"] = theta
    return log


# ---------------------------------------------------------------- parameter helpers


def lr_grid(k_values):
    """{1e-k, 2e-k, 5e-k} for each k, sorted descending."""
    vals = {round(c * 10.0 ** (-k), 12) for k in k_values for c in (1, 2, 5)}
    return sorted(vals, reverse=True)


@dataclass(frozen=True)
class Table1Params:
    lambda_w: float
    lambda_v: float
    sigma_w: float
    sigma_v: float
    tau_w_prime: float
    tau_v_prime: float
    inputs: dict

    def asdict(self):
        return asdict(self)


def table1_params(m, eps0, gamma, C0):
    """Three-layer hyper-parameter starting points with every hidden constant set to 1.

    With m = m1 = m2:

    ========== ============================== ===================
    quantity   formula                        as m doubles
    ========== ============================== ===================
    tau_w'     C0 * m**(gamma - 3/4)          decreases
    tau_v'     C0 * m**(gamma - 1/2)          decreases
    sigma_w    tau_w' * m**(-1/4)             decreases
    sigma_v    m**(-1/2)                      decreases
    lambda_w   eps0 / tau_w'**4               increases
    lambda_v   eps0 / tau_v'**2               increases
    ========== ============================== ===================

    ``lambda_w``/``lambda_v`` are sized so a regularizer at the norm caps
    costs about ``eps0``. ``gamma`` must lie in (0, 1/4].
    """
    if min(m, eps0, C0) <= 0 or not 0 < gamma <= 0.25:
        raise InvalidParameter("need m, eps0, C0 > 0 and gamma in (0, 1/4]")
    tw = C0 * m ** (gamma - 0.75)
    tv = C0 * m ** (gamma - 0.5)
    return Table1Params(
        lambda_w=eps0 / tw ** 4,
        lambda_v=eps0 / tv ** 2,
        sigma_w=tw * m ** -0.25,
        sigma_v=m ** -0.5,
        tau_w_prime=tw,
        tau_v_prime=tv,
        inputs=dict(m=m, eps0=eps0, gamma=gamma, C0=C0),
    )


TABLE1_DIRECTIONS = {"lambda_w": +1, "lambda_v": +1, "sigma_w": -1, "sigma_v": -1, "tau_w_prime": -1, "tau_v_prime": -1}


def weight_norm_summary(net):
    return {"w24": row_lp_norm(net.Wdelta, 4), "wF": row_lp_norm(net.Wdelta, 2)}
