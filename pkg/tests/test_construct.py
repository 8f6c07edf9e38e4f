import json
import math

import numpy as np
import pytest
from scipy import stats

from overparam_lab.construct import (
    HermiteBasis,
    build_fit_function,
    build_interval_partition,
    check_interval_partition,
    construct_two_layer_Wstar,
    hermite_eval,
    symmetric_difference,
    two_layer_construction_error,
    verify_fit_function,
)
from overparam_lab.errors import InvalidInput, InvalidParameter
from overparam_lab.networks import init_two_layer
from overparam_lab.numerics import make_rng, unit_rows
from overparam_lab.targets import TwoLayerTarget, constant_activation, cos_activation, sample_unit_inputs, sin_activation


@pytest.fixture(scope="module")
def sin_fit():
    return build_fit_function(sin_activation(3.0), 0.05)


class TestHermite:
    def test_low_degrees(self):
        x = np.linspace(-3, 3, 7)
        np.testing.assert_array_equal(hermite_eval(0, x), 1.0)
        np.testing.assert_array_equal(hermite_eval(1, x), x)
        assert hermite_eval(2, 0.0) == -1.0
        np.testing.assert_allclose(hermite_eval(3, x), x ** 3 - 3 * x, atol=1e-12)

    def test_recurrence_coefficients(self):
        B = HermiteBasis(10)
        C = B.coeffs
        for i in range(1, 10):
            shifted = np.concatenate([[0.0], C[i][:-1]])
            np.testing.assert_array_equal(C[i + 1], shifted - i * C[i - 1])

    def test_matches_numpy(self):
        x = np.linspace(-2, 2, 9)
        for i in range(12):
            ref = np.polynomial.hermite_e.hermeval(x, np.eye(12)[i])
            np.testing.assert_allclose(hermite_eval(i, x), ref, rtol=1e-10, atol=1e-10)

    def test_out_of_range(self):
        with pytest.raises(InvalidParameter):
            HermiteBasis(5)(6, 0.0)

    def test_orthogonality(self):
        g = make_rng(0).standard_normal(10 ** 6)
        prod = hermite_eval(2, g) * hermite_eval(3, g)
        assert abs(prod.mean()) <= 3 * prod.std() / 1e3


class TestIntervalPartition:
    def test_center(self):
        part = build_interval_partition(0.01)
        assert part.c == pytest.approx(stats.norm.ppf(0.505), rel=1e-12)
        assert part.c == pytest.approx(0.012533, abs=1e-6)
        lo, hi = part.intervals(0.0)[0]
        assert (lo, hi) == pytest.approx((-part.c, part.c), abs=1e-12)

    def test_properties(self):
        r = check_interval_partition(build_interval_partition(0.01))
        assert r["balanced"] <= 1e-6 and r["symmetric"] <= 1e-6 and r["unbiased"] <= 1e-6
        assert r["max_span"] <= 0.1
        assert math.isfinite(r["lipschitz_K"])
        assert r["jump_at_y0"] < 1e-5

    def test_sign_odd_in_y(self):
        part = build_interval_partition(0.005)
        g = np.linspace(-0.2, 0.2, 4001)
        for y in (0.0003, 0.3, 0.9):
            np.testing.assert_array_equal(part.sign(-y, g), -part.sign(y, g))
            assert part.intervals(-y) == part.intervals(y)

    def test_monte_carlo_mean(self):
        part = build_interval_partition(0.01)
        g = make_rng(1).standard_normal(4 * 10 ** 6)
        for y in (0.002, 0.5):
            s = part.sign(y, g)
            inside = s != 0
            assert inside.mean() == pytest.approx(0.01, abs=5 * math.sqrt(0.01 / g.size))
            vals = (s * g)[inside]
            assert abs(vals.mean() - y) <= 4 * vals.std() / math.sqrt(vals.size)

    def test_errors(self):
        with pytest.raises(InvalidParameter):
            build_interval_partition(0.02)
        with pytest.raises(InvalidInput):
            build_interval_partition(0.01).pieces(1.5)

    def test_symmetric_difference(self):
        assert symmetric_difference([(0.0, 1.0)], [(0.5, 2.0)]) == pytest.approx(1.5)
        assert symmetric_difference([(0.0, 1.0)], [(0.0, 1.0)]) == 0.0


class TestFitFunction:
    def test_constant(self):
        fit = build_fit_function(constant_activation(0.3), 0.05)
        h = fit(make_rng(0).standard_normal(50), make_rng(1).standard_normal(50))
        np.testing.assert_allclose(h, 0.6, rtol=1e-12)
        rep = verify_fit_function(fit, constant_activation(0.3), samples=2 * 10 ** 5)
        assert rep.tolerance_ok

    def test_sin_small_sample(self, sin_fit):
        phi = sin_activation(3.0)
        rep = verify_fit_function(sin_fit, phi, np.array([-0.7, 0.0, 0.4, 1.0]), samples=2 * 10 ** 5, seed=3, Cs=40.0)
        assert rep.max_abs_h <= sin_fit.C
        assert abs(rep.estimate[1]) <= 3 * rep.stderr[1]
        assert rep.second_moment_bound == 1600.0
        again = verify_fit_function(sin_fit, phi, np.array([-0.7, 0.0, 0.4, 1.0]), samples=2 * 10 ** 5, seed=3, Cs=40.0)
        assert rep.to_json() == again.to_json()
        assert json.loads(rep.to_json())["samples"] == 2 * 10 ** 5

    def test_polynomial_tracks_phi(self, sin_fit):
        x = np.linspace(-1, 1, 101)
        assert np.max(np.abs(sin_fit.polynomial(x) - np.sin(3 * x))) <= sin_fit.eps

    def test_bounded(self, sin_fit):
        a, b = make_rng(4).standard_normal((2, 10 ** 5)) * 3
        assert np.max(np.abs(sin_fit(a, b))) <= sin_fit.C

    def test_grid_outside(self, sin_fit):
        with pytest.raises(InvalidInput):
            verify_fit_function(sin_fit, sin_activation(3.0), np.array([1.5]), samples=10)


@pytest.fixture(scope="module")
def fits():
    return [build_fit_function(sin_activation(3.0), 0.05), build_fit_function(cos_activation(1.0), 0.05)]


class TestWstar:
    def _setup(self, a_star, m=2000, seed=0):
        rng = make_rng(seed, 30)
        t = TwoLayerTarget(unit_rows(rng.standard_normal((2, 4))), unit_rows(rng.standard_normal((2, 4))),
                           np.atleast_2d(a_star), [sin_activation(3.0), cos_activation(1.0)])
        net = init_two_layer(m, 4, 1, eps_a=0.1, profile="theory", seed=seed)
        return t, net


    def test_zero_target(self, fits):
        t, net = self._setup([[0.0, 0.0]])
        W, info = construct_two_layer_Wstar(t, net, fits)
        np.testing.assert_array_equal(W, 0.0)
        assert info["scaled_row_norm"] == 0.0

    def test_superposition(self, fits):
        t1, net = self._setup([[1.0, 0.0]])
        t2, _ = self._setup([[0.0, 1.0]])
        t3, _ = self._setup([[0.5, -0.25]])
        W1, _ = construct_two_layer_Wstar(t1, net, fits)
        W2, _ = construct_two_layer_Wstar(t2, net, fits)
        W3, info = construct_two_layer_Wstar(t3, net, fits)
        np.testing.assert_allclose(W3, 0.5 * W1 - 0.25 * W2, rtol=1e-12, atol=1e-18)
        assert math.isfinite(info["scaled_row_norm"])

    def test_missing_fit(self, fits):
        t, net = self._setup([[1.0, 0.0]])
        with pytest.raises(InvalidInput):
            construct_two_layer_Wstar(t, net, fits[:1])

    def test_error_shrinks_with_width(self, fits):
        errs = []
        for m in (500, 20000):
            t, net = self._setup([[1.0, 0.0]], m=m)
            W, _ = construct_two_layer_Wstar(t, net, fits)
            errs.append(two_layer_construction_error(net, W, t, sample_unit_inputs(4, 300, make_rng(1, 31))))
        assert errs[1] < errs[0]
