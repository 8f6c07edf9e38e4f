import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from overparam_lab.errors import InvalidParameter
from overparam_lab.numerics import (
    make_rng,
    relu,
    relu_grad,
    row_lp_norm,
    sample_gaussian_matrix,
    sample_sign_diagonal,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
matrices = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 5)), elements=finite)


class TestRowNorm:
    def test_examples(self):
        assert row_lp_norm([[3, 4], [0, 0]], 2) == pytest.approx(5.0)
        assert row_lp_norm([[1, 0], [0, 1]], 4) == pytest.approx(2 ** 0.25)
        assert row_lp_norm([[3, 4], [0, 0]], np.inf) == pytest.approx(5.0)

    def test_p2_is_frobenius(self):
        W = make_rng(0).standard_normal((7, 3))
        assert row_lp_norm(W, 2) == pytest.approx(np.linalg.norm(W))

    def test_rejects_small_p(self):
        with pytest.raises(InvalidParameter):
            row_lp_norm(np.eye(2), 0.5)

    @given(matrices, st.floats(1, 6), st.floats(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_p(self, W, p, q):
        p, q = max(p, q), min(p, q)
        assert row_lp_norm(W, p) <= row_lp_norm(W, q) * (1 + 1e-9) + 1e-12

    @given(matrices)
    @settings(max_examples=60, deadline=None)
    def test_cauchy_schwarz_chain(self, W):
        m = W.shape[0]
        n2, n4 = row_lp_norm(W, 2), row_lp_norm(W, 4)
        assert n2 >= n4 * (1 - 1e-9)
        assert n4 >= m ** -0.25 * n2 * (1 - 1e-9)


class TestRelu:
    def test_examples(self):
        assert relu(-2.0) == 0.0
        assert relu(3.0) == 3.0
        assert relu_grad(0.0) == 1.0
        assert relu_grad(-1e-300) == 0.0

    @given(finite)
    def test_identity_decomposition(self, x):
        assert relu(x) - relu(-x) == x


class TestSampling:
    def test_zero_variance(self):
        np.testing.assert_array_equal(sample_gaussian_matrix(3, 4, 0.0, make_rng(1)), np.zeros((3, 4)))

    def test_negative_variance(self):
        with pytest.raises(InvalidParameter):
            sample_gaussian_matrix(2, 2, -1.0, make_rng(0))

    def test_moments(self):
        G = sample_gaussian_matrix(1000, 1000, 1.0, make_rng(2))
        assert abs(G.mean()) < 0.005
        H = sample_gaussian_matrix(1000, 1000, 1 / 100, make_rng(3))
        assert abs(H.var() - 0.01) < 0.0002

    def test_signs(self):
        s = sample_sign_diagonal(10 ** 6, make_rng(4))
        assert set(np.unique(s)) == {-1.0, 1.0}
        assert abs(s.mean()) < 0.005
        np.testing.assert_array_equal(s, sample_sign_diagonal(10 ** 6, make_rng(4)))

    def test_streams(self):
        a = make_rng(7, (1, 2)).standard_normal(5)
        np.testing.assert_array_equal(a, make_rng(7, (1, 2)).standard_normal(5))
        assert not np.array_equal(a, make_rng(7, (1, 3)).standard_normal(5))
        assert not np.array_equal(a, make_rng(8, (1, 2)).standard_normal(5))
