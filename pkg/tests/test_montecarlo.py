import math

import numpy as np
import pytest

from maci import _parallel
from maci.errors import DomainError
from maci.exact import ParamPoint, coverage_probability, min_coverage, scaled_expected_length
from maci.montecarlo import (
    BLOCK_SIZE,
    McSettings,
    engineered_template,
    mc_coverage,
    mc_regression_end_to_end,
    mc_sel,
    sample_joint,
    true_beta,
)
from maci.testbed import derived_scalars
from maci.weights import TestbedConfig

CFG10 = TestbedConfig(m=10, p=3)


def _collect(point, cfg, settings):
    parts = list(sample_joint(point, cfg, settings))
    return [np.concatenate([p[i] for p in parts]) for i in range(3)]


class TestSettings:
    @pytest.mark.parametrize("kwargs", [
        dict(replicates=0), dict(replicates=2.5), dict(seed=-1), dict(seed=2 ** 64),
        dict(replicates=3, antithetic=True),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            McSettings(**kwargs)


class TestSampleJoint:
    def test_moments(self):
        g, gt, w = _collect(ParamPoint(1.5, 0.7), TestbedConfig(m=3, p=3), McSettings(replicates=10 ** 6))
        assert g.size == gt.size == w.size == 10 ** 6
        assert np.corrcoef(g, gt)[0, 1] == pytest.approx(0.7, abs=0.003)
        assert gt.mean() == pytest.approx(1.5, abs=0.003)
        assert g.mean() == pytest.approx(0.0, abs=0.003)
        assert (w * w).mean() == pytest.approx(1.0, abs=0.005)
        assert np.all(w > 0)

    def test_gamma_sampler_branch(self):
        g, gt, w = _collect(ParamPoint(0.0, 0.0), TestbedConfig(m=120, p=3), McSettings(replicates=200_000))
        assert (w * w).mean() == pytest.approx(1.0, abs=0.002)
        assert (w * w).var() == pytest.approx(2 / 120, rel=0.03)

    def test_block_layout(self):
        sizes = [b[0].size for b in sample_joint(ParamPoint(0, 0.5), CFG10, McSettings(replicates=BLOCK_SIZE + 5))]
        assert sizes == [BLOCK_SIZE, 5]

    def test_prefix_stability(self):
        # replicate i depends only on (seed, i): a longer run extends a shorter one
        short = _collect(ParamPoint(0.3, 0.5), CFG10, McSettings(replicates=BLOCK_SIZE))
        long = _collect(ParamPoint(0.3, 0.5), CFG10, McSettings(replicates=2 * BLOCK_SIZE))
        for a, b in zip(short, long):
            np.testing.assert_array_equal(a, b[:BLOCK_SIZE])

    def test_antithetic_mirrors(self):
        g, gt, w = _collect(ParamPoint(1.0, 0.5), CFG10, McSettings(replicates=1000, antithetic=True))
        np.testing.assert_array_equal(g[:500], -g[500:])
        np.testing.assert_allclose(gt[:500] - 1.0, -(gt[500:] - 1.0), atol=1e-12)
        np.testing.assert_array_equal(w[:500], w[500:])


class TestCoverage:
    def test_matches_exact_m1(self):
        point, cfg = ParamPoint(0.0, 0.9), TestbedConfig(m=1, p=3)
        est = mc_coverage(point, cfg)
        assert abs(est.estimate - coverage_probability(point, cfg)) <= 3 * est.std_err
        assert est.std_err == pytest.approx(math.sqrt(est.estimate * (1 - est.estimate) / 1e6))

    def test_near_null_large_m(self):
        est, se = mc_coverage(ParamPoint(1.0, 1e-9), TestbedConfig(m=200, p=3))
        assert abs(est - 0.95) <= 3 * se + 1e-3

    def test_seed_invariance(self):
        a = mc_coverage(ParamPoint(1.0, 0.7), CFG10, McSettings(replicates=200_000, seed=1))
        b = mc_coverage(ParamPoint(1.0, 0.7), CFG10, McSettings(replicates=200_000, seed=2))
        assert a.estimate != b.estimate
        assert abs(a.estimate - b.estimate) <= 6 * math.hypot(a.std_err, b.std_err)

    def test_bit_reproducible(self):
        s = McSettings(replicates=150_000, seed=99)
        assert mc_coverage(ParamPoint(2.0, 0.8), CFG10, s) == mc_coverage(ParamPoint(2.0, 0.8), CFG10, s)

    def test_independent_of_worker_count(self, monkeypatch):
        s = McSettings(replicates=4 * BLOCK_SIZE + 17, seed=5)
        point = ParamPoint(1.2, 0.6)
        monkeypatch.setattr(_parallel, "worker_count", lambda: 1)
        one = (mc_coverage(point, CFG10, s), mc_sel(point, CFG10, 0.9, s))
        monkeypatch.setattr(_parallel, "worker_count", lambda: 4)
        four = (mc_coverage(point, CFG10, s), mc_sel(point, CFG10, 0.9, s))
        assert one == four

    def test_antithetic(self):
        point = ParamPoint(0.5, 0.7)
        est = mc_coverage(point, CFG10, McSettings(replicates=400_000, antithetic=True))
        assert abs(est.estimate - coverage_probability(point, CFG10)) <= 3 * est.std_err

    def test_tiny_run_has_positive_se(self):
        est = mc_coverage(ParamPoint(0.0, 0.0), CFG10, McSettings(replicates=3))
        assert est.std_err > 0 and est.replicates == 3


class TestSel:
    def test_matches_exact(self):
        point = ParamPoint(0.0, 0.9)
        c_min = min_coverage(0.9, CFG10).c_min
        est = mc_sel(point, CFG10, c_min)
        assert abs(est.estimate - scaled_expected_length(point, CFG10, c_min)) <= 3 * est.std_err

    def test_near_null_large_m(self):
        cfg = TestbedConfig(m=200, p=3)
        est, se = mc_sel(ParamPoint(0.0, 1e-9), cfg, 0.95, McSettings(replicates=200_000))
        assert abs(est - 1.0) <= 3 * se + 0.01

    def test_even_in_gamma(self):
        s = McSettings(replicates=300_000)
        a = mc_sel(ParamPoint(2.0, 0.7), CFG10, 0.9, s)
        b = mc_sel(ParamPoint(-2.0, 0.7), CFG10, 0.9, s)
        assert abs(a.estimate - b.estimate) <= 6 * math.hypot(a.std_err, b.std_err)

    def test_domain(self):
        with pytest.raises(DomainError):
            mc_sel(ParamPoint(0.0, 0.5), CFG10, 1.2)


class TestEndToEnd:
    def test_engineered_design(self):
        tpl = engineered_template(10, 3, 0.9)
        s = derived_scalars(tpl.problem())
        assert (s.v_theta, s.v_tau) == pytest.approx((1.0, 1.0), abs=1e-12)
        assert s.rho == pytest.approx(0.9, abs=1e-12)
        beta = true_beta(tpl, 0.4, 2.0)
        assert tpl.a @ beta == pytest.approx(0.4)
        assert tpl.c @ beta - tpl.t == pytest.approx(2.0 * tpl.sigma * math.sqrt(s.v_tau))

    def test_needs_two_coefficients(self):
        with pytest.raises(DomainError):
            engineered_template(10, 1, 0.5)

    @pytest.mark.parametrize("rho, gamma", [(0.0, 0.0), (0.9, 3.0)])
    def test_agrees_with_exact(self, rho, gamma):
        tpl = engineered_template(10, 3, rho)
        res = mc_regression_end_to_end(tpl, 0.0, gamma, CFG10)
        exact = coverage_probability(ParamPoint(gamma, rho), CFG10)
        assert abs(res.coverage - exact) <= 3 * res.coverage_se
        assert res.replicates == 100_000
        assert res.rho == pytest.approx(rho, abs=1e-12)

    def test_scale_invariance(self):
        s = McSettings(replicates=100_000, seed=3)
        base = mc_regression_end_to_end(engineered_template(10, 3, 0.7), 1.0, 1.5, CFG10, s)
        big = mc_regression_end_to_end(engineered_template(10, 3, 0.7, sigma=10.0), 1.0, 1.5, CFG10, s)
        assert abs(base.coverage - big.coverage) <= 1e-12 + 6 * base.coverage_se
        assert big.mean_length == pytest.approx(10 * base.mean_length, rel=1e-9)

    def test_length_matches_sel_integral(self):
        # mean length / (2 t sigma v_theta^{1/2}) estimates E[W r(gamma_tilde / W, rho)]
        from maci.exact import expected_scaled_width, _t
        tpl = engineered_template(10, 3, 0.8)
        res = mc_regression_end_to_end(tpl, 0.0, 1.0, CFG10, McSettings(replicates=100_000))
        want = 2 * _t(CFG10) * expected_scaled_width(ParamPoint(1.0, 0.8), CFG10)
        assert abs(res.mean_length - want) <= 3 * res.length_se

    def test_config_mismatch(self):
        with pytest.raises(DomainError):
            mc_regression_end_to_end(engineered_template(10, 3, 0.5), 0, 0, TestbedConfig(m=9, p=3))

    def test_tuple_unpacking(self):
        cov, length = mc_regression_end_to_end(engineered_template(4, 2, 0.3), 0, 0, TestbedConfig(m=4, p=2),
                                               McSettings(replicates=1000))
        assert 0 <= cov <= 1 and length > 0
