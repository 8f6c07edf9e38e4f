import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from overparam_lab.errors import InvalidInput, InvalidParameter
from overparam_lab.numerics import make_rng, unit_rows
from overparam_lab.targets import (
    ComplexityParams,
    Dataset,
    ThreeLayerTarget,
    TwoLayerTarget,
    builtin_experiment_target,
    cos_activation,
    exp_activation,
    generate_dataset,
    identity_activation,
    polynomial_activation,
    sin_activation,
    tanh_truncated,
    train_test_split,
)

E = np.eye(4)


def _random_two_layer(p, d, seed):
    rng = make_rng(seed)
    return TwoLayerTarget(
        unit_rows(rng.standard_normal((p, d))),
        unit_rows(rng.standard_normal((p, d))),
        rng.uniform(-1, 1, (2, p)),
        [sin_activation(3.0)] * p,
    )


class TestActivations:
    @pytest.mark.parametrize("act", [
        sin_activation(3.0), cos_activation(7.0), exp_activation(2.0), tanh_truncated(0.5),
        polynomial_activation((1.0, -2.0, 0.5)),
    ])
    def test_taylor_matches(self, act):
        assert act.max_taylor_error() <= 1e-10

    def test_complexity_positive(self):
        with pytest.raises(InvalidParameter):
            ComplexityParams(1.0, 0.0, 1.0)


class TestTwoLayerTarget:
    def test_identity(self):
        t = TwoLayerTarget(E[:1], E[:1], [[1.0]], [identity_activation()])
        np.testing.assert_allclose(t(E[0]), [1.0])

    def test_zero_a(self):
        t = _random_two_layer(3, 4, 0)
        t0 = TwoLayerTarget(t.w1, t.w2, np.zeros_like(t.a), t.phis)
        np.testing.assert_array_equal(t0(unit_rows(np.ones((2, 4)))), 0.0)

    def test_sin_example(self):
        t = TwoLayerTarget(E[:1], E[1:2], [[1.0]], [sin_activation(3.0)])
        x = (E[0] + E[1]) / math.sqrt(2)
        np.testing.assert_allclose(t(x), [math.sin(3 / math.sqrt(2)) / math.sqrt(2)], rtol=1e-12)
        np.testing.assert_allclose(t(x), [0.602632113584306], rtol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            _random_two_layer(2, 4, 0)(np.ones(3) / math.sqrt(3))

    @given(st.integers(0, 10 ** 6), st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_homogeneous_in_a(self, seed, c):
        t = _random_two_layer(3, 4, seed)
        x = unit_rows(make_rng(seed, 1).standard_normal((5, 4)))
        scaled = TwoLayerTarget(t.w1, t.w2, t.a * c / 3, t.phis)
        np.testing.assert_allclose(scaled(x), t(x) * c / 3, atol=1e-12)

    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=25, deadline=None)
    def test_term_permutation(self, seed):
        rng = make_rng(seed)
        t = TwoLayerTarget(
            unit_rows(rng.standard_normal((3, 4))), unit_rows(rng.standard_normal((3, 4))),
            rng.uniform(-1, 1, (1, 3)), [sin_activation(3.0), cos_activation(2.0), identity_activation()],
        )
        perm = rng.permutation(3)
        tp = TwoLayerTarget(t.w1[perm], t.w2[perm], t.a[:, perm], [t.phis[i] for i in perm])
        x = unit_rows(rng.standard_normal((6, 4)))
        np.testing.assert_allclose(tp(x), t(x), atol=1e-12)


class TestThreeLayerTarget:
    def test_identity(self):
        I = identity_activation()
        t = ThreeLayerTarget(E[:1], E[:1], [[1.0]], [[1.0]], [[1.0]], [I], [I], [I])
        np.testing.assert_allclose(t(E[0]), [1.0])

    def test_zero_a(self):
        I = identity_activation()
        t = ThreeLayerTarget(E[:1], E[:1], [[1.0]], [[1.0]], [[0.0]], [I], [I], [I])
        np.testing.assert_array_equal(t(E[0]), [0.0])

    def test_fig1_in_concept_form(self):
        # Phi(s) = (s - 2)^2 with s = sum_j sin(3 x_j) over three equal-weight paths
        # scaled back up by sqrt(3); the linear factor is cos(7 x_4)
        r3 = math.sqrt(3)
        S = sin_activation(3.0)
        Phi = polynomial_activation((4.0, -4.0 * r3, 3.0))
        w1 = E[:3]
        w2 = np.tile(E[3], (3, 1))
        v1 = np.full((1, 3), 1 / r3)
        v2 = np.full((1, 3), 1 / r3)
        C = cos_activation(7.0)
        t = ThreeLayerTarget(w1, w2, v1, v2, [[1.0]], [S] * 3, [C] * 3, [Phi])
        # linear factor comes out as sqrt(3) cos(7 x_4)
        x = E[3]
        np.testing.assert_allclose(t(x) / r3, [4 * math.cos(7)], rtol=1e-9)
        np.testing.assert_allclose(t(x) / r3, [3.01560901737322], rtol=1e-9)
        X = unit_rows(make_rng(5).standard_normal((20, 4)))
        np.testing.assert_allclose(t(X)[:, 0] / r3, builtin_experiment_target("sin-fig1")(X)[:, 0], atol=1e-8)


class TestBuiltins:
    def test_sin_fig1(self):
        f = builtin_experiment_target("sin-fig1")
        np.testing.assert_allclose(f(E[0]), [(math.sin(3) - 2) ** 2], rtol=1e-12)
        np.testing.assert_allclose(f(E[0]), [3.45543482443535], rtol=1e-12)
        np.testing.assert_allclose(f(E[2]), f(E[0]), rtol=1e-12)
        np.testing.assert_allclose(f(E[3]), [4 * math.cos(7)], rtol=1e-12)

    def test_tanh_fig6(self):
        f = builtin_experiment_target("tanh-fig6")
        np.testing.assert_allclose(f(E[3]), [4 * math.tanh(8)], rtol=1e-12)
        np.testing.assert_allclose(f(E[3]), [3.9999990997187], rtol=1e-12)

    def test_unknown(self):
        with pytest.raises(InvalidParameter):
            builtin_experiment_target("relu-fig9")


class TestDatasets:
    def test_unit_norm(self):
        ds = generate_dataset(4, 1000, builtin_experiment_target("sin-fig1"), "raw", make_rng(0))
        np.testing.assert_allclose(np.linalg.norm(ds.inputs, axis=1), 1.0, atol=1e-12)
        assert ds.inputs.shape == (1000, 4) and ds.labels.shape == (1000, 1)

    def test_pad_half(self):
        f = builtin_experiment_target("sin-fig1")
        ds = generate_dataset(4, 200, f, "pad-half", make_rng(1))
        assert ds.d == 5
        assert np.all(ds.inputs[:, -1] == 0.5)
        np.testing.assert_allclose(np.linalg.norm(ds.inputs, axis=1), 1.0, atol=1e-12)
        raw = ds.inputs[:, :4] / (math.sqrt(3) / 2)
        np.testing.assert_allclose(ds.labels, f(raw), atol=1e-12)

    def test_errors(self):
        f = builtin_experiment_target("sin-fig1")
        with pytest.raises(InvalidParameter):
            generate_dataset(4, 0, f, "raw", make_rng(0))
        with pytest.raises(InvalidParameter):
            generate_dataset(4, 5, f, "pad-zero", make_rng(0))

    def test_seeded_and_disjoint(self):
        f = builtin_experiment_target("sin-fig1")
        a, b = train_test_split(4, 50, 500, f, seed=3)
        a2, _ = train_test_split(4, 50, 500, f, seed=3)
        np.testing.assert_array_equal(a.inputs, a2.inputs)
        common = {tuple(r) for r in a.inputs} & {tuple(r) for r in b.inputs}
        assert not common

    def test_csv_roundtrip(self, tmp_path):
        ds = generate_dataset(4, 30, builtin_experiment_target("tanh-fig6"), "raw", make_rng(2))
        path = tmp_path / "d.csv"
        ds.to_csv(path)
        assert path.read_text().splitlines()[0] == "x_1,x_2,x_3,x_4,y_1"
        back = Dataset.from_csv(path)
        np.testing.assert_array_equal(back.inputs, ds.inputs)
        np.testing.assert_array_equal(back.labels, ds.labels)
