"""Dense-array helpers: row norms, ReLU with the 1[x >= 0] subgradient,
and seeded samplers.

Matrices and vectors are plain ``numpy.ndarray`` objects (float64, row-major).
"""
import numpy as np

from .errors import InvalidParameter

__all__ = [
    "make_rng",
    "row_lp_norm",
    "relu",
    "relu_grad",
    "sample_gaussian_matrix",
    "sample_sign_diagonal",
    "unit_rows",
]


def make_rng(seed, stream=0):
    """Independent generator for the pair ``(seed, stream)``.

    Streams are derived with ``SeedSequence`` spawn keys, so distinct stream
    ids never overlap and the same pair always reproduces the same draws.
    """
    if isinstance(stream, (tuple, list)):
        key = tuple(int(s) for s in stream)
    else:
        key = (int(stream),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def row_lp_norm(W, p):
    """(sum_i ||W_i||_2^p)^(1/p) over the rows of ``W``; ``p=np.inf`` gives the max row norm."""
    if not p >= 1:
        raise InvalidParameter(f"p must be >= 1, got {p}")
    W = np.atleast_2d(np.asarray(W, dtype=float))
    r = np.linalg.norm(W, axis=1)
    if np.isinf(p):
        return float(r.max()) if r.size else 0.0
    if p == 2:
        return float(np.sqrt(np.sum(r * r)))
    return float(np.sum(r ** p) ** (1.0 / p))


def relu(x):
    return np.maximum(x, 0.0)


def relu_grad(x):
    # subgradient 1 at exactly 0, as autodiff frameworks do
    return (np.asarray(x) >= 0).astype(float)


def sample_gaussian_matrix(rows, cols, variance, rng):
    if variance < 0:
        raise InvalidParameter(f"variance must be nonnegative, got {variance}")
    return rng.standard_normal((rows, cols)) * np.sqrt(variance)


def sample_sign_diagonal(n, rng):
    """Diagonal of a random +-1 matrix, returned as a length-``n`` vector."""
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    return rng.integers(0, 2, size=n).astype(float) * 2.0 - 1.0


def unit_rows(X):
    X = np.asarray(X, dtype=float)
    return X / np.linalg.norm(X, axis=-1, keepdims=True)
