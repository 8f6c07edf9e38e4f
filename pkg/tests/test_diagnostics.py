import math

import numpy as np
import pytest

from overparam_lab.diagnostics import (
    CouplingReport,
    count_sign_flips,
    curvature_probe,
    flip_scaling,
    generalization_gap,
    norm_ratio,
    random_perturbation,
    worst_case_perturbation,
    write_coupling_csv,
)
from overparam_lab.errors import InvalidInput, InvalidParameter
from overparam_lab.networks import init_three_layer, init_two_layer
from overparam_lab.numerics import make_rng, row_lp_norm, unit_rows
from overparam_lab.targets import builtin_experiment_target, generate_dataset
from overparam_lab.training import LossFn, RegParams, SGDConfig, SmoothingParams, TrainLog, draw_noise, objective_L1, sgd_two_layer


def _x(seed):
    return unit_rows(make_rng(seed, 14).standard_normal(4))


class TestSignFlips:
    def test_zero_perturbation(self):
        net = init_three_layer(200, 50, 4, 1, seed=0)
        r = count_sign_flips(net, _x(0), np.zeros_like(net.W0))
        assert (r.flips1, r.flips2, r.output_gap) == (0.0, 0.0, 0.0)

    def test_worst_case_budget(self):
        net = init_three_layer(2000, 16, 4, 1, seed=1)
        P = worst_case_perturbation(net, _x(1), 0.02)
        assert row_lp_norm(P, 4) <= 0.02
        r = count_sign_flips(net, _x(1), P)
        assert r.flips1 == np.count_nonzero(np.linalg.norm(P, axis=1))
        assert r.flips1 <= net.m1 and r.flips2 <= net.m2

    def test_monotone_in_tau(self):
        med = []
        for tau in (0.01, 0.02, 0.04):
            counts = [count_sign_flips(net, _x(s), worst_case_perturbation(net, _x(s), tau)).flips1
                      for s, net in ((s, init_three_layer(2000, 8, 4, 1, seed=s)) for s in range(20))]
            med.append(np.median(counts))
        assert med[0] < med[1] < med[2]

    def test_random_monotone_and_reproducible(self):
        med = []
        for tau in (0.05, 0.1):
            counts = []
            for s in range(20):
                net = init_three_layer(1000, 8, 4, 1, seed=s)
                P = random_perturbation(net.W0.shape, tau, make_rng(s, 2))
                assert row_lp_norm(P, 4) == pytest.approx(tau)
                counts.append(count_sign_flips(net, _x(s), P).flips1)
            med.append(np.median(counts))
        assert med[0] < med[1]
        net = init_three_layer(1000, 8, 4, 1, seed=3)
        a = count_sign_flips(net, _x(3), random_perturbation(net.W0.shape, 0.1, make_rng(3, 2)), seed=3)
        b = count_sign_flips(net, _x(3), random_perturbation(net.W0.shape, 0.1, make_rng(3, 2)), seed=3)
        assert a == b

    def test_small_scaling(self):
        medians, slope = flip_scaling(lambda m, s: init_three_layer(m, 8, 4, 1, seed=s), [500, 2000], 0.02,
                                      range(10), None, lambda net, s: _x(s))
        assert medians[0] < medians[1]
        assert 0.8 < slope < 1.6

    def test_shape_mismatch(self):
        net = init_three_layer(20, 10, 4, 1)
        with pytest.raises(InvalidInput):
            count_sign_flips(net, _x(0), np.zeros((3, 4)))
        with pytest.raises(InvalidInput):
            count_sign_flips(init_two_layer(20, 4, 1), _x(0), np.zeros((20, 4)))

    def test_csv(self, tmp_path):
        r = CouplingReport(100, 16, 0.02, 0.0, 3, 4.0, 0.0, 1e-3)
        write_coupling_csv([r], tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines == ["m1,m2,tau_w,tau_v,seed,flips1,flips2,output_gap", "100,16,0.02,0.0,3,4.0,0.0,0.001"]


class TestCurvature:
    def test_quadratics(self):
        d = unit_rows(make_rng(0).standard_normal(5))
        for eta in (1e-2, 1e-4):
            p = curvature_probe(lambda x: float(x @ x), np.ones(5), d, eta)
            assert p.estimate == pytest.approx(2.0, abs=1e-6)
        p = curvature_probe(lambda z: z[0] ** 2 - z[1] ** 2, np.array([0.3, -0.2]), np.array([0.0, 1.0]), 1e-4)
        assert p.estimate == pytest.approx(-2.0, abs=1e-6)

    def test_bad_args(self):
        with pytest.raises(InvalidParameter):
            curvature_probe(lambda x: 0.0, np.zeros(2), np.array([1.0, 0.0]), 0.0)
        with pytest.raises(InvalidParameter):
            curvature_probe(lambda x: 0.0, np.zeros(2), np.array([1.0, 1.0]), 0.1)

    @staticmethod
    def _smoothed_net_probes(samples):
        net = init_three_layer(30, 20, 4, 1, seed=2)
        data = generate_dataset(4, 20, builtin_experiment_target("sin-fig1"), "raw", make_rng(2))
        sm = SmoothingParams(0.05, 0.05)
        nW = net.W0.size
        n = nW + net.V0.size

        def objective(theta, rng):
            net.Wdelta = theta[:nW].reshape(net.W0.shape)
            net.Vdelta = theta[nW:].reshape(net.V0.shape)
            return objective_L1(net, (data.inputs, data.labels), RegParams(), sm, rng=rng)[0]

        d = unit_rows(make_rng(2, 1).standard_normal(n))
        return [curvature_probe(objective, np.zeros(n), d, eta, samples=samples, seed=2, stochastic=True)
                for eta in (1e-4, 1e-6)]

    def test_smoothed_net_consistent(self):
        a, b = self._smoothed_net_probes(200)
        assert math.isfinite(a.estimate) and math.isfinite(b.estimate)
        assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr)
        # each noise draw gives a piecewise-smooth function, so kink crossings inflate the spread as eta shrinks
        assert b.stderr > a.stderr

    @pytest.mark.xfail(reason="second differences of a ReLU objective under fixed noise have variance growing "
                              "like eta^-1/2; 20% agreement at eta=1e-6 needs ~1e5 samples", strict=False)
    def test_smoothed_net_within_20_percent(self):
        a, b = self._smoothed_net_probes(200)
        assert abs(a.estimate - b.estimate) <= 0.2 * max(abs(a.estimate), abs(b.estimate))


class TestNormRatio:
    def test_limits(self):
        assert norm_ratio(np.array([[3.0, 4.0], [0.0, 5.0], [5.0, 0.0]])) == 1.0
        W = np.zeros((10, 3))
        W[7] = [1.0, -2.0, 0.5]
        assert norm_ratio(W) == 10.0

    def test_range(self):
        rng = make_rng(5)
        for _ in range(1000):
            W = rng.standard_normal((100, 4)) * rng.exponential(1.0, (100, 1))
            assert 1.0 - 1e-12 <= norm_ratio(W) <= 100.0
        assert 1.0 <= norm_ratio(make_rng(6).standard_normal((100, 4))) <= 100.0

    def test_zero(self):
        with pytest.raises(InvalidInput):
            norm_ratio(np.zeros((3, 2)))


class TestGap:
    def test_same_sets(self):
        data = generate_dataset(4, 50, builtin_experiment_target("sin-fig1"), "raw", make_rng(0))
        net = init_two_layer(20, 4, 1, profile="experiment", seed=0)
        log = sgd_two_layer(net, data, LossFn("squared"), SGDConfig(eta=0.01, epochs=3), make_rng(0), test=data)
        assert generalization_gap(log) == 0.0

    def test_missing(self):
        with pytest.raises(InvalidInput):
            generalization_gap(TrainLog())
        log = TrainLog()
        log.add(0, 1.0)
        with pytest.raises(InvalidInput):
            generalization_gap(log)
