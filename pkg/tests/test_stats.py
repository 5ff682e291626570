"""Centered statistics, the time change, and the Monte Carlo harnesses."""

import json

import numpy as np
import pytest

import hawkesmix as hm
from hawkesmix.errors import HypothesisError, NumericError


def hand_log() -> hm.EventLog:
    return hm.EventLog(
        d=2,
        horizon=10.0,
        events=(
            np.array([0.5, 2.0, 7.25]),
            np.array([4.0]),
        ),
    )


class TestPartialStatistics:
    def test_hand_computed_values(self, d2_model):
        log = hand_log()
        f = hm.TestFunction.constant([1.0, 2.0])
        m = d2_model.mean_intensity  # (10/3, 10/3)
        ts = np.array([1.0, 4.0, 10.0])
        got = hm.partial_statistics(log, d2_model, f, ts)
        counts1 = np.array([1.0, 2.0, 3.0])
        counts2 = np.array([0.0, 1.0, 1.0])
        expect = counts1 + 2.0 * counts2 - (m[0] + 2.0 * m[1]) * ts
        assert np.allclose(got, expect, atol=1e-12)

    def test_empty_log_pure_drift(self, d2_model):
        log = hm.EventLog(d=2, horizon=5.0,
                          events=(np.array([]), np.array([])))
        f = hm.TestFunction.constant([1.0, 1.0])
        got = hm.statistic_ST(log, d2_model, f, 5.0)
        assert got == pytest.approx(-float(np.sum(d2_model.mean_intensity)) * 5.0)

    def test_indicator_weight_counts_window(self, d2_model):
        log = hand_log()
        f = hm.TestFunction([hm.IndicatorF(1.0, 3.0), hm.ConstantF(0.0)])
        got = hm.statistic_ST(log, d2_model, f, 10.0)
        assert got == pytest.approx(1.0 - d2_model.mean_intensity[0] * 2.0)

    def test_centering_unbiased(self, d2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        vals = []
        for ss in hm.spawn_seeds(77, 400):
            log = hm.simulate(d2_model, 50.0, seed=ss)
            vals.append(hm.statistic_ST(log, d2_model, f, 50.0))
        vals = np.asarray(vals)
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean()) < 3.5 * se

    def test_horizon_checked(self, d2_model):
        log = hand_log()
        f = hm.TestFunction.constant([1.0, 1.0])
        with pytest.raises(ValueError):
            hm.partial_statistics(log, d2_model, f, [20.0])


class TestTimeChange:
    def test_poisson_ratio_is_linear(self, poisson2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        tc = hm.time_change(poisson2_model, f, 100.0)
        u = np.array([0.1, 0.25, 0.5, 0.9])
        assert np.allclose(tc(u), u * 100.0, rtol=1e-6, atol=0.2)

    def test_endpoint_exact(self, d1_model):
        f = hm.TestFunction.constant([1.0])
        tc = hm.time_change(d1_model, f, 37.0)
        assert tc(1.0) == pytest.approx(37.0, abs=0.0)

    def test_values_on_grid_and_monotone(self, d2_model):
        f = hm.TestFunction.constant([1.0, 0.5])
        tc = hm.time_change(d2_model, f, 60.0, grid_step=0.5)
        u = np.linspace(0.05, 1.0, 20)
        v = tc(u)
        assert np.all(np.diff(v) >= 0.0)
        assert np.all(np.isin(v, tc.ts))

    def test_ratio_inversion(self, d1_model):
        """v_T(sigma_t^2 / sigma_T^2) recovers t up to one grid step."""
        f = hm.TestFunction.constant([1.0])
        tc = hm.time_change(d1_model, f, 50.0, grid_step=0.05)
        idx = [100, 400, 700]
        u = tc.sigma2[idx] / tc.sigma_T2
        assert np.allclose(tc(u), tc.ts[idx], atol=0.05 + 1e-9)

    def test_nonmonotone_profile_rejected(self):
        with pytest.raises(NumericError):
            hm.TimeChange(np.array([1.0, 2.0, 3.0]),
                          np.array([1.0, 3.0, 2.0]))

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            hm.TimeChange(np.array([1.0, 2.0]), np.array([-1.0, 0.0]))

    def test_grid_step_validated(self, d1_model):
        f = hm.TestFunction.constant([1.0])
        with pytest.raises(ValueError):
            hm.time_change(d1_model, f, 10.0, grid_step=11.0)


class TestPathSample:
    def test_shapes_and_scaling(self, d1_model):
        f = hm.TestFunction.constant([1.0])
        tc = hm.time_change(d1_model, f, 30.0)
        log = hm.simulate(d1_model, 30.0, seed=3)
        ps = hm.path_sample(log, d1_model, f, tc, [0.25, 0.5, 1.0])
        assert ps.values.shape == (3,)
        assert ps.sigma_T == pytest.approx(np.sqrt(tc.sigma_T2))
        direct = hm.statistic_ST(log, d1_model, f, 30.0) / ps.sigma_T
        assert ps.values[-1] == pytest.approx(direct, rel=1e-12)
        payload = json.dumps(ps.to_dict())
        assert "sigma_T" in payload


@pytest.fixture(scope="module")
def small_report(d2_model):
    f = hm.TestFunction.constant([1.0, 1.0])
    return hm.clt_harness(d2_model, f, horizon=200.0, replicates=60,
                          seed=14, grid=[0.5, 1.0])


class TestCltHarness:
    def test_report_contents(self, small_report):
        rep = small_report
        assert rep.replicates == 60
        assert rep.samples.shape == (60,)
        assert rep.w_paths.shape == (60, 2)
        assert rep.w_cov.shape == (2, 2)
        assert rep.cov_target[0, 0] == 0.5
        assert 0.0 <= rep.ks_stat <= 1.0
        assert isinstance(rep.passed, bool)

    def test_json_round_trip(self, small_report):
        payload = json.loads(json.dumps(small_report.to_dict()))
        assert payload["replicates"] == 60
        assert set(payload["flags"]) == {
            "normal_ks", "brownian_cov", "unit_variance"
        }

    def test_deterministic(self, d2_model, small_report):
        f = hm.TestFunction.constant([1.0, 1.0])
        again = hm.clt_harness(d2_model, f, horizon=200.0, replicates=60,
                               seed=14, grid=[0.5, 1.0])
        assert again.to_dict() == small_report.to_dict()

    def test_threads_do_not_change_result(self, d2_model, small_report):
        f = hm.TestFunction.constant([1.0, 1.0])
        rep2 = hm.clt_harness(d2_model, f, horizon=200.0, replicates=60,
                              seed=14, grid=[0.5, 1.0], threads=2)
        assert rep2.to_dict() == small_report.to_dict()

    def test_moment_condition_enforced(self, d2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        with pytest.raises(HypothesisError):
            hm.clt_harness(d2_model, f, 100.0, 20, seed=1,
                           beta=2.0, delta=2.0)

    def test_replicate_floor(self, d2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        with pytest.raises(ValueError):
            hm.clt_harness(d2_model, f, 100.0, 5, seed=1)

    def test_grid_validated(self, d2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        with pytest.raises(ValueError):
            hm.clt_harness(d2_model, f, 100.0, 20, seed=1, grid=[0.0, 1.0])
        with pytest.raises(ValueError):
            hm.clt_harness(d2_model, f, 100.0, 20, seed=1, grid=[0.5, 1.5])


class TestDecayDiagnostic:
    def test_poisson_covariances_vanish(self, poisson2_model):
        rep = hm.mixing_decay_diagnostic(poisson2_model, 0, 1, 1.0,
                                         [3.0, 6.0], replicates=800, seed=6)
        assert np.allclose(rep.spectral, 0.0, atol=1e-12)
        assert np.all(np.abs(rep.empirical) < 4.0 * rep.empirical_se + 1e-9)
        assert rep.bound is None

    def test_d1_empirical_matches_spectral(self, d1_model):
        rep = hm.mixing_decay_diagnostic(d1_model, 0, 0, 1.0, [2.0],
                                         replicates=3000, seed=21)
        assert abs(rep.empirical[0] - rep.spectral[0]) < 4.0 * rep.empirical_se[0]

    def test_bound_block_attached(self, d1_model):
        rep = hm.mixing_decay_diagnostic(d1_model, 0, 0, 1.0, [3.0, 5.0],
                                         replicates=50, seed=2,
                                         beta=1.0, gamma=0.5)
        assert rep.bound is not None
        assert np.all(rep.bound > 0.0)
        assert rep.mixing.gamma == 0.5
        payload = json.loads(json.dumps(rep.to_dict()))
        assert payload["mixing"]["gamma"] == 0.5

    def test_lag_validation(self, d1_model):
        with pytest.raises(ValueError):
            hm.mixing_decay_diagnostic(d1_model, 0, 0, 2.0, [1.0],
                                       replicates=50, seed=0)
        with pytest.raises(ValueError):
            hm.mixing_decay_diagnostic(d1_model, 0, 0, -1.0, [3.0],
                                       replicates=50, seed=0)
