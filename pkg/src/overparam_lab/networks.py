"""Two- and three-layer ReLU learners, sign patterns, pseudo networks and
kernel-baseline feature maps.

Only the hidden weights train. Each net keeps its random initialization
(``W0``, ``V0``) separate from the learned increments (``Wdelta``,
``Vdelta``); the effective weights are their sum. Inputs may be a single
vector ``x`` of shape (d,) or a batch of shape (n, d); outputs follow suit.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidParameter
from .numerics import make_rng

PROFILES = ("theory", "experiment")


def _batch(x, d):
    x = np.asarray(x)
    if x.dtype not in (np.float32, np.float64):
        x = x.astype(float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != d:
        raise InvalidInput(f"expected input dimension {d}, got shape {x.shape}")
    return X, single


def _left_mul(D, V):
    # D @ V, arranged so BLAS sees the transposed-operand layout (about 2x faster here)
    return (V.T @ D.T).T


def _gate(z):
    return z >= 0


@dataclass
class TwoLayerNet:
    """f_r(x; W) = sum_i a_{r,i} relu(<w_i, x> + b_i) with W = W0 + Wdelta."""

    W0: np.ndarray
    Wdelta: np.ndarray
    b: np.ndarray
    a: np.ndarray
    eps_a: float = 1.0
    profile: str = "theory"
    seed: int = 0

    @property
    def m(self):
        return self.W0.shape[0]

    @property
    def d(self):
        return self.W0.shape[1]

    @property
    def k(self):
        return self.a.shape[0]

    @property
    def W(self):
        return self.W0 + self.Wdelta

    def preactivation(self, X, W=None):
        W = self.W if W is None else W
        return X @ W.T + self.b

    def forward(self, x, W=None):
        X, single = _batch(x, self.d)
        out = np.maximum(self.preactivation(X, W), 0.0) @ self.a.T
        return out[0] if single else out

    def backward(self, x, loss_grad, W=None):
        """Gradient of sum_n <loss_grad_n, f(x_n)> with respect to W."""
        X, _ = _batch(x, self.d)
        G = np.atleast_2d(loss_grad)
        delta = (G @ self.a) * _gate(self.preactivation(X, W))
        return delta.T @ X

    def predict_and_grad(self, X, grad_fn, W=None):
        """One pass: predictions P and the gradient of sum <grad_fn(P), f> in W."""
        W = self.W if W is None else W
        z = self.preactivation(X, W)
        P = np.maximum(z, 0.0) @ self.a.T
        delta = (grad_fn(P) @ self.a) * _gate(z)
        return P, delta.T @ X

    def astype(self, dtype):
        c = self.copy()
        for name in ("W0", "Wdelta", "b", "a"):
            setattr(c, name, getattr(c, name).astype(dtype))
        return c

    def copy(self):
        return TwoLayerNet(self.W0.copy(), self.Wdelta.copy(), self.b.copy(), self.a.copy(), self.eps_a, self.profile, self.seed)


@dataclass
class ThreeLayerNet:
    """lambda * sum_i a_{r,i} relu(<v_i, relu(W x + b1)> + b2_i)."""

    W0: np.ndarray
    V0: np.ndarray
    Wdelta: np.ndarray
    Vdelta: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    a: np.ndarray
    lam: float = 1.0
    profile: str = "experiment"
    seed: int = 0

    @property
    def m1(self):
        return self.W0.shape[0]

    @property
    def m2(self):
        return self.V0.shape[0]

    @property
    def d(self):
        return self.W0.shape[1]

    @property
    def k(self):
        return self.a.shape[0]

    @property
    def W(self):
        return self.W0 + self.Wdelta

    @property
    def V(self):
        return self.V0 + self.Vdelta

    def hidden(self, X, W=None, V=None):
        W = self.W if W is None else W
        V = self.V if V is None else V
        z1 = X @ W.T + self.b1
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ V.T + self.b2
        return z1, h1, z2, np.maximum(z2, 0.0)

    def forward(self, x, W=None, V=None):
        X, single = _batch(x, self.d)
        out = self.lam * (self.hidden(X, W, V)[3] @ self.a.T)
        return out[0] if single else out

    def backward(self, x, loss_grad, W=None, V=None):
        """Gradients (dW, dV) of sum_n <loss_grad_n, f(x_n)>; includes the lambda factor."""
        X, _ = _batch(x, self.d)
        V = self.V if V is None else V
        z1, h1, z2, _ = self.hidden(X, W, V)
        G = np.atleast_2d(loss_grad)
        delta2 = self.lam * (G @ self.a) * _gate(z2)
        dV = delta2.T @ h1
        delta1 = _left_mul(delta2, V) * _gate(z1)
        return delta1.T @ X, dV

    def predict_and_grad(self, X, grad_fn, W=None, V=None):
        """One pass: predictions P and gradients (dW, dV) of sum <grad_fn(P), f>."""
        W = self.W if W is None else W
        V = self.V if V is None else V
        z1, h1, z2, h2 = self.hidden(X, W, V)
        P = self.lam * (h2 @ self.a.T)
        delta2 = self.lam * (grad_fn(P) @ self.a) * _gate(z2)
        dV = delta2.T @ h1
        delta1 = _left_mul(delta2, V) * _gate(z1)
        return P, delta1.T @ X, dV

    def astype(self, dtype):
        c = self.copy()
        for name in ("W0", "V0", "Wdelta", "Vdelta", "b1", "b2", "a"):
            setattr(c, name, getattr(c, name).astype(dtype))
        return c

    def copy(self):
        return ThreeLayerNet(
            self.W0.copy(), self.V0.copy(), self.Wdelta.copy(), self.Vdelta.copy(),
            self.b1.copy(), self.b2.copy(), self.a.copy(), self.lam, self.profile, self.seed,
        )


def init_two_layer(m, d, k, eps_a=1.0, profile="theory", rng=None, seed=0):
    """Gaussian init: W0, b ~ N(0, 1/m); a ~ N(0, eps_a^2) (theory) or N(0, 1) (experiment)."""
    if min(m, d, k) < 1:
        raise InvalidParameter("m, d, k must be >= 1")
    if not 0 < eps_a <= 1:
        raise InvalidParameter(f"eps_a must lie in (0, 1], got {eps_a}")
    if profile not in PROFILES:
        raise InvalidParameter(f"unknown init profile {profile!r}")
    rng = make_rng(seed, 0) if rng is None else rng
    s = 1.0 / np.sqrt(m)
    W0 = rng.standard_normal((m, d)) * s
    b = rng.standard_normal(m) * s
    a_scale = eps_a if profile == "theory" else 1.0
    a = rng.standard_normal((k, m)) * a_scale
    return TwoLayerNet(W0, np.zeros_like(W0), b, a, float(eps_a), profile, int(seed))


def init_three_layer(m1, m2, d, k, profile="experiment", rng=None, seed=0):
    """W0, b1 ~ N(0, 1/m1); V0, b2 ~ N(0, 1/m2); a ~ N(0, 1); lambda = 1."""
    if min(m1, m2, d, k) < 1:
        raise InvalidParameter("m1, m2, d, k must be >= 1")
    if profile not in PROFILES:
        raise InvalidParameter(f"unknown init profile {profile!r}")
    rng = make_rng(seed, 0) if rng is None else rng
    s1, s2 = 1.0 / np.sqrt(m1), 1.0 / np.sqrt(m2)
    W0 = rng.standard_normal((m1, d)) * s1
    b1 = rng.standard_normal(m1) * s1
    V0 = rng.standard_normal((m2, m1)) * s2
    b2 = rng.standard_normal(m2) * s2
    a = rng.standard_normal((k, m2))
    return ThreeLayerNet(W0, V0, np.zeros_like(W0), np.zeros_like(V0), b1, b2, a, 1.0, profile, int(seed))


def forward_two_layer(net, x):
    return net.forward(x)


def forward_three_layer(net, x):
    return net.forward(x)


def backward(net, x, loss_grad):
    return net.backward(x, loss_grad)


# ---------------------------------------------------------------- sign patterns


@dataclass(frozen=True)
class SignPattern:
    """0/1 ReLU indicators per input row: ``dw`` is (n, m1), ``dv`` is (n, m2) or None."""

    dw: np.ndarray
    dv: np.ndarray = None

    def flips(self, other):
        f1 = int(np.count_nonzero(self.dw != other.dw))
        f2 = None if self.dv is None else int(np.count_nonzero(self.dv != other.dv))
        return f1, f2


def _weights_at(net, at, weights):
    three = isinstance(net, ThreeLayerNet)
    if at == "init":
        return (net.W0, net.V0) if three else (net.W0,)
    if at == "current":
        return (net.W, net.V) if three else (net.W,)
    if at == "custom":
        if weights is None:
            raise InvalidInput("custom sign pattern needs weights")
        return tuple(weights) if three else (weights[0] if isinstance(weights, tuple) else weights,)
    raise InvalidParameter(f"unknown weight selector {at!r}")


def sign_pattern(net, x, at="init", weights=None):
    X, _ = _batch(x, net.d)
    ws = _weights_at(net, at, weights)
    if isinstance(net, ThreeLayerNet):
        z1, _, z2, _ = net.hidden(X, *ws)
        return SignPattern(_gate(z1).astype(np.int8), _gate(z2).astype(np.int8))
    return SignPattern(_gate(net.preactivation(X, ws[0])).astype(np.int8))


def pseudo_forward(net, x, frozen, bias_mode="full", weights=None):
    """Forward pass with every relu(z) replaced by frozen_indicator * z.

    ``bias_mode`` is ``"full"`` (all biases kept), ``"semi"`` (three-layer only:
    second-layer bias dropped) or ``"none"`` (all biases dropped). The pass is
    evaluated at the net's current weights unless ``weights`` overrides them.
    """
    X, single = _batch(x, net.d)
    if bias_mode not in ("full", "semi", "none"):
        raise InvalidParameter(f"unknown bias mode {bias_mode!r}")
    n = X.shape[0]
    if isinstance(net, ThreeLayerNet):
        W, V = (net.W, net.V) if weights is None else weights
        if frozen.dv is None or frozen.dw.shape != (n, net.m1) or frozen.dv.shape != (n, net.m2):
            raise InvalidInput("frozen sign pattern does not match the net and batch")
        z1 = X @ W.T
        if bias_mode == "full" or bias_mode == "semi":
            z1 = z1 + net.b1
        h1 = np.where(frozen.dw.astype(bool), z1, 0.0)
        z2 = h1 @ V.T
        if bias_mode == "full":
            z2 = z2 + net.b2
        h2 = np.where(frozen.dv.astype(bool), z2, 0.0)
        out = net.lam * (h2 @ net.a.T)
    else:
        if bias_mode == "semi":
            raise InvalidParameter("two-layer pseudo networks have no semi-bias variant")
        W = net.W if weights is None else weights
        if frozen.dw.shape != (n, net.m):
            raise InvalidInput("frozen sign pattern does not match the net and batch")
        z = X @ W.T
        if bias_mode == "full":
            z = z + net.b
        out = np.where(frozen.dw.astype(bool), z, 0.0) @ net.a.T
    return out[0] if single else out


# ---------------------------------------------------------------- feature maps


@dataclass
class FeatureMap:
    """Linear model over a frozen-init network.

    Predictions are ``offset(x) + <Phi_r(x), theta>`` per output r. Features
    are applied lazily: ``prepare`` caches the frozen activations for a set of
    inputs, ``predict``/``vjp`` work on row subsets of that cache, so the
    (n, k, dim) feature tensor is never materialized during training.
    """

    kind: str
    dim: int
    k: int
    theta0: np.ndarray
    prepare: callable
    predict: callable
    vjp: callable
    meta: dict = field(default_factory=dict)

    def extract(self, x):
        """Dense features, shape (k, dim) for one input or (n, k, dim) for a batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        cache = self.prepare(X)
        feats = np.empty((X.shape[0], self.k, self.dim))
        for i in range(X.shape[0]):
            row = {key: v[i : i + 1] for key, v in cache.items()}
            for r in range(self.k):
                G = np.zeros((1, self.k))
                G[0, r] = 1.0
                feats[i, r] = self.vjp(row, G)
        return feats[0] if single else feats

    def __call__(self, x):
        return self.extract(x)

    def predict_x(self, x, theta):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out = self.predict(self.prepare(x[None, :] if single else x), theta)
        return out[0] if single else out


def _zero_offset(n, k):
    return np.zeros((n, k))


def conjugate_feature_map(net):
    """Top-hidden-layer activations at init; training ``theta`` replaces the output layer."""
    if isinstance(net, ThreeLayerNet):
        m, lam = net.m2, net.lam

        def hid(X):
            return net.hidden(X, net.W0, net.V0)[3]

    else:
        m, lam = net.m, 1.0

        def hid(X):
            return np.maximum(net.preactivation(X, net.W0), 0.0)

    k = net.k

    def prepare(X):
        X, _ = _batch(X, net.d)
        return {"H": lam * hid(X)}

    def predict(cache, theta):
        return cache["H"] @ theta.reshape(k, m).T

    def vjp(cache, G):
        return (np.atleast_2d(G).T @ cache["H"]).ravel()

    return FeatureMap("conjugate", k * m, k, net.a.ravel().copy(), prepare, predict, vjp)


def ntk_feature_map(net):
    """Gradient of the outputs with respect to the hidden weights at init.

    ``theta`` is the flattened increment (W' for two layers, [W', V'] for
    three); ``offset`` is the network output at init, so the model is the
    first-order expansion f(W0) + <grad f(W0), theta>.
    """
    k, d = net.k, net.d
    if isinstance(net, ThreeLayerNet):
        m1, m2, lam = net.m1, net.m2, net.lam
        nW = m1 * d

        def prepare(X):
            X, _ = _batch(X, d)
            z1, h1, z2, h2 = net.hidden(X, net.W0, net.V0)
            return {"X": X, "h1": h1, "dw": _gate(z1), "dv": _gate(z2), "f0": lam * (h2 @ net.a.T)}

        def predict(cache, theta):
            dW = theta[:nW].reshape(m1, d)
            dV = theta[nW:].reshape(m2, m1)
            u = np.where(cache["dw"], cache["X"] @ dW.T, 0.0)
            s = cache["h1"] @ dV.T + u @ net.V0.T
            return cache["f0"] + lam * (np.where(cache["dv"], s, 0.0) @ net.a.T)

        def vjp(cache, G):
            delta2 = lam * (np.atleast_2d(G) @ net.a) * cache["dv"]
            gV = delta2.T @ cache["h1"]
            delta1 = _left_mul(delta2, net.V0) * cache["dw"]
            gW = delta1.T @ cache["X"]
            return np.concatenate([gW.ravel(), gV.ravel()])

        dim = nW + m2 * m1
    else:
        m = net.m

        def prepare(X):
            X, _ = _batch(X, d)
            z = net.preactivation(X, net.W0)
            return {"X": X, "dw": _gate(z), "f0": np.maximum(z, 0.0) @ net.a.T}

        def predict(cache, theta):
            dW = theta.reshape(m, d)
            return cache["f0"] + np.where(cache["dw"], cache["X"] @ dW.T, 0.0) @ net.a.T

        def vjp(cache, G):
            delta = (np.atleast_2d(G) @ net.a) * cache["dw"]
            return (delta.T @ cache["X"]).ravel()

        dim = m * d

    return FeatureMap("ntk", dim, k, np.zeros(dim, dtype=net.W0.dtype), prepare, predict, vjp)


# ---------------------------------------------------------------- checkpoints


def save_checkpoint(net, path):
    """Write ``net`` to a self-describing ``.npz`` file (arrays stored losslessly)."""
    if isinstance(net, ThreeLayerNet):
        meta = {"arch": "3layer", "m1": net.m1, "m2": net.m2, "d": net.d, "k": net.k,
                "lam": float(net.lam).hex(),
                "profile": net.profile, "seed": net.seed}
        arrays = dict(W0=net.W0, V0=net.V0, Wdelta=net.Wdelta, Vdelta=net.Vdelta, b1=net.b1, b2=net.b2, a=net.a)
    else:
        meta = {"arch": "2layer", "m": net.m, "d": net.d, "k": net.k, "eps_a": float(net.eps_a).hex(),
                "profile": net.profile, "seed": net.seed}
        arrays = dict(W0=net.W0, Wdelta=net.Wdelta, b=net.b, a=net.a)
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def load_checkpoint(path):
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        arrays = {key: z[key].copy() for key in z.files if key != "meta"}
    if meta["arch"] == "3layer":
        return ThreeLayerNet(arrays["W0"], arrays["V0"], arrays["Wdelta"], arrays["Vdelta"], arrays["b1"],
                             arrays["b2"], arrays["a"], float.fromhex(meta["lam"]), meta["profile"], meta["seed"])
    return TwoLayerNet(arrays["W0"], arrays["Wdelta"], arrays["b"], arrays["a"], float.fromhex(meta["eps_a"]),
                       meta["profile"], meta["seed"])
