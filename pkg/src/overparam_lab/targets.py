"""Target functions, smooth activations with Taylor data, and synthetic data."""
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInput, InvalidParameter
from .numerics import unit_rows

DEFAULT_TAYLOR_DEGREE = 30
TAYLOR_TOL = 1e-10


@dataclass(frozen=True)
class SmoothActivation:
    """A scalar activation together with its Taylor coefficients c_0..c_D."""

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    taylor_coeffs: tuple

    def __call__(self, z):
        return self.evaluator(np.asarray(z, dtype=float))

    @property
    def degree(self):
        return len(self.taylor_coeffs) - 1

    def taylor(self, z, degree=None):
        c = self.taylor_coeffs if degree is None else self.taylor_coeffs[: degree + 1]
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=float), c)

    def max_taylor_error(self, n=2001):
        z = np.linspace(-1.0, 1.0, n)
        return float(np.max(np.abs(self(z) - self.taylor(z))))


def _degree_for(term, degree):
    """Smallest degree >= ``degree`` whose next two terms are below TAYLOR_TOL."""
    D = degree
    while abs(term(D + 1)) + abs(term(D + 2)) > TAYLOR_TOL / 10 and D < 400:
        D += 1
    return D


def sin_activation(c=1.0, degree=DEFAULT_TAYLOR_DEGREE):
    def term(i):
        return 0.0 if i % 2 == 0 else (-1) ** ((i - 1) // 2) * c ** i / math.factorial(i)

    D = _degree_for(term, degree)
    return SmoothActivation(f"sin({c:g}z)", lambda z: np.sin(c * z), tuple(term(i) for i in range(D + 1)))


def cos_activation(c=1.0, degree=DEFAULT_TAYLOR_DEGREE):
    def term(i):
        return 0.0 if i % 2 else (-1) ** (i // 2) * c ** i / math.factorial(i)

    D = _degree_for(term, degree)
    return SmoothActivation(f"cos({c:g}z)", lambda z: np.cos(c * z), tuple(term(i) for i in range(D + 1)))


def exp_activation(c=1.0, degree=DEFAULT_TAYLOR_DEGREE):
    """e^{cz} - 1."""

    def term(i):
        return 0.0 if i == 0 else c ** i / math.factorial(i)

    D = _degree_for(term, degree)
    return SmoothActivation(f"exp({c:g}z)-1", lambda z: np.expm1(c * z), tuple(term(i) for i in range(D + 1)))


def tanh_series(degree):
    """Taylor coefficients of tanh from t' = 1 - t^2."""
    t = np.zeros(degree + 1)
    for n in range(degree):
        conv = float(np.dot(t[: n + 1], t[n::-1]))
        t[n + 1] = ((1.0 if n == 0 else 0.0) - conv) / (n + 1)
    return t


def tanh_truncated(c=1.0, degree=DEFAULT_TAYLOR_DEGREE):
    """Degree-``degree`` Taylor truncation of tanh(cz); the truncation *is* the activation."""
    coeffs = tuple(float(v) * c ** i for i, v in enumerate(tanh_series(degree)))
    return SmoothActivation(
        f"tanh({c:g}z)[deg {degree}]",
        lambda z: np.polynomial.polynomial.polyval(z, coeffs),
        coeffs,
    )


def polynomial_activation(coeffs, name=None):
    coeffs = tuple(float(v) for v in coeffs)
    return SmoothActivation(
        name or f"poly{coeffs}",
        lambda z: np.polynomial.polynomial.polyval(z, coeffs) + 0.0 * z,
        coeffs,
    )


def identity_activation():
    return polynomial_activation((0.0, 1.0), name="z")


def constant_activation(c):
    return polynomial_activation((float(c),), name=f"const({c:g})")


@dataclass(frozen=True)
class ComplexityParams:
    """User-supplied stand-ins for the activation complexity functionals."""

    Cs: float
    Ceps: float
    C0: float

    def __post_init__(self):
        if min(self.Cs, self.Ceps, self.C0) <= 0:
            raise InvalidParameter("complexity parameters must be positive")


def _check_unit(vectors, what):
    norms = np.linalg.norm(vectors, axis=-1)
    if not np.allclose(norms, 1.0, atol=1e-9):
        raise InvalidParameter(f"{what} must be unit vectors")


def _as_batch(x, d):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[-1] != d:
        raise InvalidInput(f"expected inputs of dimension {d}, got {X.shape[-1]}")
    return X, single


@dataclass(frozen=True)
class TwoLayerTarget:
    """f*_r(x) = sum_i a*_{r,i} phi_i(<w1_i, x>) <w2_i, x>."""

    w1: np.ndarray  # (p, d)
    w2: np.ndarray  # (p, d)
    a: np.ndarray  # (k, p)
    phis: Sequence[SmoothActivation]

    def __post_init__(self):
        w1, w2, a = (np.atleast_2d(np.asarray(v, dtype=float)) for v in (self.w1, self.w2, self.a))
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "a", a)
        if w1.shape != w2.shape or a.shape[1] != w1.shape[0] or len(self.phis) != w1.shape[0]:
            raise InvalidInput("inconsistent target shapes")
        _check_unit(w1, "w1")
        _check_unit(w2, "w2")
        if np.any(np.abs(a) > 1 + 1e-12):
            raise InvalidParameter("|a*| must be <= 1")

    @property
    def p(self):
        return self.w1.shape[0]

    @property
    def k(self):
        return self.a.shape[0]

    @property
    def d(self):
        return self.w1.shape[1]

    def terms(self, x):
        """Per-term values phi_i(<w1_i,x>) <w2_i,x>, shape (n, p)."""
        X, _ = _as_batch(x, self.d)
        z1 = X @ self.w1.T
        z2 = X @ self.w2.T
        return np.column_stack([phi(z1[:, i]) for i, phi in enumerate(self.phis)]) * z2

    def __call__(self, x):
        X, single = _as_batch(x, self.d)
        out = self.terms(X) @ self.a.T
        return out[0] if single else out


def eval_two_layer_target(t, x):
    return t(x)


@dataclass(frozen=True)
class ThreeLayerTarget:
    """f*_r(x) = sum_i a*_{r,i} Phi_i(sum_j v1_{i,j} phi1_j(<w1_j,x>)) (sum_j v2_{i,j} phi2_j(<w2_j,x>))."""

    w1: np.ndarray  # (p2, d)
    w2: np.ndarray  # (p2, d)
    v1: np.ndarray  # (p1, p2)
    v2: np.ndarray  # (p1, p2)
    a: np.ndarray  # (k, p1)
    phi1: Sequence[SmoothActivation]
    phi2: Sequence[SmoothActivation]
    Phi: Sequence[SmoothActivation]

    def __post_init__(self):
        for name in ("w1", "w2", "v1", "v2", "a"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        p2, p1 = self.w1.shape[0], self.v1.shape[0]
        if (
            self.w2.shape != self.w1.shape
            or self.v1.shape != (p1, p2)
            or self.v2.shape != (p1, p2)
            or self.a.shape[1] != p1
            or len(self.phi1) != p2
            or len(self.phi2) != p2
            or len(self.Phi) != p1
        ):
            raise InvalidInput("inconsistent target shapes")
        for name in ("w1", "w2", "v1", "v2"):
            _check_unit(getattr(self, name), name)
        if np.any(np.abs(self.a) > 1 + 1e-12):
            raise InvalidParameter("|a*| must be <= 1")

    @property
    def d(self):
        return self.w1.shape[1]

    @property
    def k(self):
        return self.a.shape[0]

    def __call__(self, x):
        X, single = _as_batch(x, self.d)
        z1 = X @ self.w1.T
        z2 = X @ self.w2.T
        h1 = np.column_stack([f(z1[:, j]) for j, f in enumerate(self.phi1)])
        h2 = np.column_stack([f(z2[:, j]) for j, f in enumerate(self.phi2)])
        inner = h1 @ self.v1.T
        lin = h2 @ self.v2.T
        outer = np.column_stack([F(inner[:, i]) for i, F in enumerate(self.Phi)])
        out = (outer * lin) @ self.a.T
        return out[0] if single else out


def eval_three_layer_target(t, x):
    return t(x)


@dataclass(frozen=True)
class ExperimentTarget:
    name: str
    d: int
    fn: Callable[[np.ndarray], np.ndarray]
    k: int = 1

    def __call__(self, x):
        X, single = _as_batch(x, self.d)
        out = self.fn(X)[:, None]
        return out[0] if single else out


def _sin_fig1(X):
    return (np.sin(3 * X[:, 0]) + np.sin(3 * X[:, 1]) + np.sin(3 * X[:, 2]) - 2) ** 2 * np.cos(7 * X[:, 3])


def _tanh_fig6(X):
    return (np.tanh(8 * X[:, 0]) + np.tanh(8 * X[:, 1]) + np.tanh(8 * X[:, 2]) - 2) ** 2 * np.tanh(8 * X[:, 3])


BUILTIN_TARGETS = {"sin-fig1": _sin_fig1, "tanh-fig6": _tanh_fig6}


def builtin_experiment_target(name):
    if name not in BUILTIN_TARGETS:
        raise InvalidParameter(f"unknown target {name!r}; choose from {sorted(BUILTIN_TARGETS)}")
    return ExperimentTarget(name, 4, BUILTIN_TARGETS[name])


@dataclass
class Dataset:
    inputs: np.ndarray  # (N, d)
    labels: np.ndarray  # (N, k)
    padding_mode: str = "raw"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def d(self):
        return self.inputs.shape[1]

    @property
    def k(self):
        return self.labels.shape[1]

    def to_csv(self, path):
        header = [f"x_{i + 1}" for i in range(self.d)] + [f"y_{r + 1}" for r in range(self.k)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for x, y in zip(self.inputs, self.labels):
                w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y])

    @classmethod
    def from_csv(cls, path, padding_mode="raw"):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        nx = sum(1 for h in header if h.startswith("x_"))
        return cls(body[:, :nx], body[:, nx:], padding_mode)


def sample_unit_inputs(d, N, rng, padding_mode="raw"):
    if d < 1 or N < 1:
        raise InvalidParameter("d and N must be >= 1")
    X = unit_rows(rng.standard_normal((N, d)))
    if padding_mode == "raw":
        return X
    if padding_mode == "pad-half":
        # keep the direction, shrink to norm sqrt(3)/2, then append 1/2
        return np.hstack([X * (np.sqrt(3.0) / 2.0), np.full((N, 1), 0.5)])
    raise InvalidParameter(f"unknown padding mode {padding_mode!r}")


def generate_dataset(d, N, target, padding_mode, rng):
    """``N`` unit-norm inputs in R^d (R^{d+1} when padded) labelled by ``target``."""
    raw = sample_unit_inputs(d, N, rng)
    Y = np.asarray(target(raw), dtype=float).reshape(N, -1)
    if padding_mode == "raw":
        return Dataset(raw, Y, padding_mode)
    if padding_mode != "pad-half":
        raise InvalidParameter(f"unknown padding mode {padding_mode!r}")
    # labels come from the unpadded direction
    X = np.hstack([raw * (np.sqrt(3.0) / 2.0), np.full((N, 1), 0.5)])
    return Dataset(X, Y, padding_mode)


def train_test_split(d, N, N_test, target, seed, padding_mode="raw"):
    """Train and test sets drawn from disjoint RNG streams of ``seed``."""
    from .numerics import make_rng

    train = generate_dataset(d, N, target, padding_mode, make_rng(seed, (1, 0)))
    test = generate_dataset(d, N_test, target, padding_mode, make_rng(seed, (1, 1)))
    return train, test
