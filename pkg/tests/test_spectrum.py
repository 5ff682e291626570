"""Bartlett spectral density, variance evaluators, and count covariances."""

import numpy as np
import pytest

import hawkesmix as hm
from hawkesmix.errors import HypothesisError


def d1_variance_exact(t: float) -> float:
    """Closed-form Var(N_t) for the single-type model with eta = 1 and an
    exponential kernel with mass 1/2 and rate 2 (so kappa = beta - alpha*beta
    = 1): Var = 8t - 6 + 6 exp(-t)."""
    return 8.0 * t - 6.0 + 6.0 * np.exp(-t)


class TestFourierMatrix:
    def test_entries_match_kernels(self, d2_model):
        xi = 0.37
        got = hm.fourier_matrix(d2_model, xi)
        for i in range(2):
            for j in range(2):
                assert got[i, j] == pytest.approx(
                    complex(d2_model.kernels[i][j].fourier(xi)), abs=1e-14
                )

    def test_zero_frequency_is_reproduction(self, d2_model):
        got = hm.fourier_matrix(d2_model, 0.0)
        assert np.allclose(got, d2_model.validate().reproduction, atol=1e-14)
        assert np.allclose(got.imag, 0.0, atol=1e-15)


class TestBartlettDensity:
    def test_d1_zero_frequency(self, d1_model):
        gam = hm.bartlett_grid(d1_model, 0.0)[0]
        assert abs(gam[0, 0] - 8.0) < 1e-10

    def test_poisson_is_flat_diagonal(self, poisson2_model):
        xis = np.array([-3.0, 0.0, 0.17, 42.0])
        gam = hm.bartlett_grid(poisson2_model, xis)
        for p in range(xis.size):
            assert np.array_equal(gam[p], np.diag(poisson2_model.eta))

    def test_hermitian_and_psd_on_random_frequencies(self, d2_model):
        rng = np.random.default_rng(5)
        xis = rng.uniform(-40.0, 40.0, size=300)
        gam = hm.bartlett_grid(d2_model, xis)
        for p in range(xis.size):
            assert np.linalg.norm(gam[p] - gam[p].conj().T) < 1e-12
            eig = np.linalg.eigvalsh(gam[p])
            assert eig.min() > -1e-10

    def test_conjugate_symmetry_in_frequency(self, d2_model):
        xis = np.array([0.3, 1.7, 9.1])
        plus = hm.bartlett_grid(d2_model, xis)
        minus = hm.bartlett_grid(d2_model, -xis)
        assert np.allclose(minus, np.conj(plus), atol=1e-14)

    def test_matches_direct_solve(self, d2_model):
        summary = d2_model.validate()
        m = np.diag(summary.mean_intensity)
        eye = np.eye(2)
        for xi in (0.0, 0.21, 2.0, -1.3):
            h = hm.fourier_matrix(d2_model, xi)
            a = np.linalg.inv(eye - h.T)
            direct = a @ m @ a.conj().T
            got = hm.bartlett_grid(d2_model, xi)[0]
            assert np.allclose(got, direct, atol=1e-12)

    def test_spectrum_matrix_helpers(self, d2_model):
        s = hm.bartlett_density(d2_model, 0.8)
        assert s.hermitian_defect() < 1e-12
        assert s.min_eigenvalue() > -1e-12
        payload = s.to_dict()
        assert set(payload) >= {"xi", "real", "imag"}


class TestVarianceProfile:
    def test_d1_closed_form(self, d1_model):
        f = hm.TestFunction.constant([1.0])
        ts = np.array([1.0, 3.0, 10.0, 40.0, 200.0])
        got = hm.variance_profile(d1_model, f, ts)
        expect = d1_variance_exact(ts)
        assert np.allclose(got, expect, rtol=1e-6)

    def test_poisson_counts_exact(self, poisson2_model):
        f = hm.TestFunction.constant([1.0, 0.0])
        for t in (0.5, 7.0):
            got = hm.variance_ST(poisson2_model, f, t)
            assert got == pytest.approx(poisson2_model.eta[0] * t, rel=1e-12)

    def test_general_path_matches_fast_path(self, d2_model):
        # amplitude-zero bump forces the windowed-transform branch while
        # representing the same statistic as plain constants
        fast = hm.TestFunction.constant([1.0, 0.5])
        slow = hm.TestFunction([
            hm.ConstPlusIndicatorF(1.0, 1.0, 2.0, 0.0),
            hm.ConstantF(0.5),
        ])
        for t in (4.0, 30.0):
            a = hm.variance_ST(d2_model, fast, t)
            b = hm.variance_ST(d2_model, slow, t)
            assert b == pytest.approx(a, rel=1e-6)

    def test_count_variance_routes_agree(self, d1_model):
        """Var(N(A)) through the indicator statistic and through the
        count-covariance evaluator must coincide."""
        a, b = 2.0, 5.0
        f = hm.TestFunction([hm.IndicatorF(a, b)])
        via_stat = hm.variance_ST(d1_model, f, 10.0)
        via_cov = hm.cov_counts(d1_model, 0, 0, (a, b), (a, b))
        assert via_cov == pytest.approx(via_stat, rel=1e-6)

    def test_profile_monotone(self, d2_model):
        f = hm.TestFunction.constant([1.0, 1.0])
        ts = np.linspace(0.5, 50.0, 25)
        prof = hm.variance_profile(d2_model, f, ts)
        assert np.all(np.diff(prof) > 0.0)

    def test_validation(self, d2_model):
        f1 = hm.TestFunction.constant([1.0])
        with pytest.raises(ValueError):
            hm.variance_ST(d2_model, f1, 10.0)
        f2 = hm.TestFunction.constant([1.0, 1.0])
        with pytest.raises(ValueError):
            hm.variance_profile(d2_model, f2, [])
        with pytest.raises(ValueError):
            hm.variance_profile(d2_model, f2, [-1.0])


class TestAsymptoticVariance:
    def test_d1_slope(self, d1_model):
        assert hm.asymptotic_variance_const(d1_model, [1.0]) == pytest.approx(
            8.0, abs=1e-10
        )

    def test_zero_weights(self, d2_model):
        assert hm.asymptotic_variance_const(d2_model, [0.0, 0.0]) == 0.0

    def test_matches_zero_frequency_form(self, d2_model):
        k = np.array([1.0, -2.0])
        gam0 = hm.bartlett_grid(d2_model, 0.0)[0].real
        assert hm.asymptotic_variance_const(d2_model, k) == pytest.approx(
            float(k @ gam0 @ k), rel=1e-12
        )

    def test_slope_matches_long_window(self, d1_model):
        f = hm.TestFunction.constant([1.0])
        t = 4000.0
        slope = hm.variance_ST(d1_model, f, t) / t
        assert slope == pytest.approx(8.0, rel=1e-3)

    def test_weight_length_checked(self, d2_model):
        with pytest.raises(ValueError):
            hm.asymptotic_variance_const(d2_model, [1.0])


class TestPeriodicVariance:
    def test_trig_reference_value(self, d1_model):
        # f(t) = 1 + cos(2 pi t): slope = gamma(0) + gamma(1) / 2
        f = hm.TestFunction([
            hm.TrigPolyF(period=1.0, a0=1.0, cos_coeffs=[1.0])
        ])
        got = hm.asymptotic_variance_periodic(d1_model, f, 1.0)
        assert got.value == pytest.approx(9.074113569095573, rel=1e-9)
        # harmonics beyond |n| = 1 vanish exactly; the certified tail only
        # sees the envelope, so it is small relative to the value, not tiny
        assert got.tail_estimate < 0.02 * got.value

    def test_constant_reduces_to_zero_frequency(self, d2_model):
        f = hm.TestFunction([
            hm.TrigPolyF(period=2.0, a0=1.5),
            hm.TrigPolyF(period=2.0, a0=-0.5),
        ])
        got = hm.asymptotic_variance_periodic(d2_model, f, 2.0)
        gam0 = hm.bartlett_grid(d2_model, 0.0)[0].real
        k = np.array([1.5, -0.5])
        assert got.value == pytest.approx(float(k @ gam0 @ k), rel=1e-9)

    def test_term_count_converged(self, d1_model):
        f = hm.TestFunction([
            hm.TrigPolyF(period=1.0, a0=1.0, cos_coeffs=[0.5], sin_coeffs=[0.2])
        ])
        lo = hm.asymptotic_variance_periodic(d1_model, f, 1.0, n_max=64)
        hi = hm.asymptotic_variance_periodic(d1_model, f, 1.0, n_max=128)
        assert hi.value == pytest.approx(lo.value, rel=1e-3)
        assert hi.tail_estimate < lo.tail_estimate

    def test_matches_long_window_slope(self, d1_model):
        f = hm.TestFunction([
            hm.TrigPolyF(period=1.0, a0=1.0, cos_coeffs=[1.0])
        ])
        slope = hm.asymptotic_variance_periodic(d1_model, f, 1.0).value
        t = 1000.0
        assert hm.variance_ST(d1_model, f, t) / t == pytest.approx(
            slope, rel=2e-2
        )

    def test_zero_mean_rejected(self, d1_model):
        f = hm.TestFunction([
            hm.TrigPolyF(period=1.0, a0=0.0, cos_coeffs=[1.0])
        ])
        with pytest.raises(HypothesisError):
            hm.asymptotic_variance_periodic(d1_model, f, 1.0)

    def test_small_term_count_rejected(self, d1_model):
        f = hm.TestFunction([hm.TrigPolyF(period=1.0, a0=1.0)])
        with pytest.raises(ValueError):
            hm.asymptotic_variance_periodic(d1_model, f, 1.0, n_max=1)


class TestCovCounts:
    def test_poisson_overlap(self, poisson2_model):
        got = hm.cov_counts(poisson2_model, 0, 0, (0.0, 3.0), (1.0, 5.0))
        assert got == pytest.approx(poisson2_model.eta[0] * 2.0, rel=1e-12)

    def test_poisson_disjoint_and_cross(self, poisson2_model):
        assert hm.cov_counts(poisson2_model, 0, 0, (0.0, 1.0), (2.0, 3.0)) == 0.0
        assert hm.cov_counts(poisson2_model, 0, 1, (0.0, 1.0), (0.0, 1.0)) == 0.0

    def test_d1_exponential_decay(self, d1_model):
        # unit windows at lag tau: Cov = 3 (e - 1)^2 e^(-1) e^(-tau)
        pref = 3.0 * (np.e - 1.0) ** 2 / np.e
        for tau in (2.0, 5.0, 9.0):
            got = hm.cov_counts(d1_model, 0, 0, (0.0, 1.0),
                                (tau, tau + 1.0), abs_tol=1e-12)
            assert got == pytest.approx(pref * np.exp(-tau), rel=1e-6)

    def test_symmetry_in_windows(self, d2_model):
        a, b = (0.0, 2.0), (3.0, 4.5)
        ab = hm.cov_counts(d2_model, 0, 1, a, b, abs_tol=1e-12)
        ba = hm.cov_counts(d2_model, 1, 0, b, a, abs_tol=1e-12)
        assert ba == pytest.approx(ab, rel=1e-9, abs=1e-12)

    def test_window_validation(self, d2_model):
        with pytest.raises(ValueError):
            hm.cov_counts(d2_model, 0, 0, (1.0, 1.0), (0.0, 2.0))
        with pytest.raises(ValueError):
            hm.cov_counts(d2_model, 2, 0, (0.0, 1.0), (0.0, 1.0))
