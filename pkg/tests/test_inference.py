from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as sstats
from scipy.integrate import quad

from eventspec import (CoherenceDistribution, ConfigError,
                       DegenerateSegmentError, EventStream, Flavor,
                       StationarityConfig, ValidationError, chi2_sf,
                       hyp2f1, lrt_statistic,
                       null_percentile, simulate_poisson, stationarity_test)


def hyp2f1_exact(a1: Fraction, a2: Fraction, b1: Fraction, z: Fraction,
                 terms: int = 2000) -> float:
    """Exact-rational partial sum of the Gauss series (independent oracle)."""
    total = Fraction(0)
    term = Fraction(1)
    for k in range(terms):
        total += term
        term *= (a1 + k) * (a2 + k) * z
        term /= (b1 + k) * (k + 1)
    return float(total)


class TestHyp2f1:
    def test_unit_at_zero(self):
        assert hyp2f1(3.7, 1.2, 0.9, 0.0) == 1.0

    def test_geometric_identity(self):
        assert hyp2f1(1.0, 1.0, 1.0, 0.5) == pytest.approx(2.0, abs=1e-12)

    def test_high_precision_oracle(self):
        n = Fraction(433, 100)
        got = hyp2f1(4.33, 4.33, 1.0, 0.3)
        expected = hyp2f1_exact(n, n, Fraction(1), Fraction(3, 10))
        assert got == pytest.approx(expected, abs=1e-10)

    def test_domain_checks(self):
        with pytest.raises(ValidationError):
            hyp2f1(1.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            hyp2f1(1.0, 1.0, -2.0, 0.5)


class TestCoherenceDensity:
    def test_complex_null_is_beta(self):
        n = 8.31
        dist = CoherenceDistribution(n=n, rho2=0.0, flavor=Flavor.COMPLEX)
        xs = np.linspace(0.0, 0.95, 20)
        expected = (n - 1.0) * (1.0 - xs) ** (n - 2.0)
        assert np.abs(dist.pdf(xs) - expected).max() < 1e-12

    def test_real_null_is_beta_half(self):
        dist = CoherenceDistribution(n=10.0, rho2=0.0, flavor=Flavor.REAL)
        xs = np.linspace(0.01, 0.95, 20)
        expected = sstats.beta(0.5, 4.5).pdf(xs)
        assert np.abs(dist.pdf(xs) - expected).max() < 1e-10

    @pytest.mark.parametrize("flavor", [Flavor.COMPLEX, Flavor.REAL])
    @pytest.mark.parametrize("n", [4.0, 8.31, 10.0, 11.57])
    @pytest.mark.parametrize("rho2", [0.0, 0.4, 0.8])
    def test_integrates_to_one(self, flavor, n, rho2):
        dist = CoherenceDistribution(n=n, rho2=rho2, flavor=flavor)
        # substitute x = y^2 to regularize the real flavor's x^(-1/2)
        value, err = quad(lambda y: dist.pdf(y * y) * 2.0 * y, 0.0, 1.0,
                          limit=300)
        assert value == pytest.approx(1.0, abs=1e-6)

    def test_domain_error(self):
        dist = CoherenceDistribution(n=8.0, rho2=0.0)
        with pytest.raises(ValidationError):
            dist.pdf(1.0)
        with pytest.raises(ValidationError):
            dist.pdf(-0.1)

    def test_cdf_matches_quadrature(self):
        dist = CoherenceDistribution(n=8.31, rho2=0.4, flavor=Flavor.COMPLEX)
        for x in [0.1, 0.45, 0.9]:
            direct, _ = quad(lambda y: dist.pdf(y * y) * 2.0 * y, 0.0,
                             np.sqrt(x), limit=200)
            assert dist.cdf(x) == pytest.approx(direct, abs=1e-6)


class TestNullPercentile:
    def test_morlet_kappa10_percentile(self, morlet_sys10):
        n = morlet_sys10.degrees_of_freedom()
        assert null_percentile(Flavor.COMPLEX, n, 0.95) == pytest.approx(
            0.593, abs=0.01)

    def test_uniform_case(self):
        assert null_percentile(Flavor.COMPLEX, 2.0, 0.95) == pytest.approx(
            0.95, abs=1e-12)

    def test_closed_form_inverts_cdf(self):
        for n in [3.3, 8.31, 25.0]:
            for q in [0.1, 0.5, 0.95, 0.999]:
                x = null_percentile(Flavor.COMPLEX, n, q)
                cdf = 1.0 - (1.0 - x) ** (n - 1.0)
                assert cdf == pytest.approx(q, abs=1e-12)

    def test_real_median_against_density_quadrature(self):
        n = 10.0
        got = null_percentile(Flavor.REAL, n, 0.5)
        dist = CoherenceDistribution(n=n, rho2=0.0, flavor=Flavor.REAL)
        from scipy.optimize import brentq
        target = brentq(
            lambda x: quad(lambda y: dist.pdf(y * y) * 2 * y, 0, np.sqrt(x),
                           limit=200)[0] - 0.5, 1e-9, 1 - 1e-9, xtol=1e-12)
        assert got == pytest.approx(target, abs=1e-8)


class TestChi2Sf:
    def test_at_zero(self):
        assert chi2_sf(0.0, 3.0) == 1.0

    def test_exponential_case(self):
        assert chi2_sf(2 * np.log(20.0), 2.0) == pytest.approx(0.05, abs=1e-10)

    def test_table_quantile(self):
        assert chi2_sf(7.8147, 3.0) == pytest.approx(0.05, abs=1e-4)

    def test_matches_scipy(self):
        for dof in [1.0, 4.0, 28.0]:
            for x in [0.5, 3.0, 30.0]:
                assert chi2_sf(x, dof) == pytest.approx(
                    sstats.chi2(dof).sf(x), abs=1e-12)


class TestLrtStatistic:
    def rand_psd(self, rng, p=2):
        m = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
        return m @ m.conj().T + 0.5 * np.eye(p)

    def test_identical_inputs_zero(self, rng):
        b = self.rand_psd(rng)
        assert lrt_statistic([b, b, b, b], 8.31) == pytest.approx(0.0, abs=1e-10)

    def test_scalar_case_formula(self):
        n, b1, b2 = 7.7, 2.0, 3.5
        got = lrt_statistic([np.array([[b1]]), np.array([[b2]])], n)
        expected = -2 * n * (2 * np.log(2) + np.log(b1) + np.log(b2)
                             - 2 * np.log(b1 + b2))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_scale_invariance(self, rng):
        mats = [self.rand_psd(rng) for _ in range(4)]
        s1 = lrt_statistic(mats, 10.0)
        s2 = lrt_statistic([7.3 * m for m in mats], 10.0)
        assert s1 == pytest.approx(s2, rel=1e-10)

    def test_nonnegative_and_positive_when_unequal(self, rng):
        for _ in range(20):
            mats = [self.rand_psd(rng) for _ in range(3)]
            stat = lrt_statistic(mats, 5.0)
            assert stat >= 0.0
            assert stat > 1e-10  # random draws essentially never tie

    def test_real_flavor_halves_exponent(self, rng):
        mats = [self.rand_psd(rng).real + 2 * np.eye(2) for _ in range(2)]
        full = lrt_statistic(mats, 9.0, Flavor.COMPLEX)
        half = lrt_statistic(mats, 9.0, Flavor.REAL)
        assert half == pytest.approx(full / 2.0, rel=1e-12)

    def test_singular_matrix_names_segment(self):
        good = np.eye(2)
        bad = np.zeros((2, 2))
        with pytest.raises(DegenerateSegmentError, match="segment 2"):
            lrt_statistic([good, bad], 5.0)

    def test_needs_two_segments(self):
        with pytest.raises(ValidationError):
            lrt_statistic([np.eye(2)], 5.0)


class TestStationarityTest:
    def test_report_structure(self):
        stream = simulate_poisson([2.0, 2.0], 1500.0, seed=3)
        report = stationarity_test(stream, StationarityConfig(J=3))
        assert [s.dof for s in report.scales] == [4, 12, 28]
        assert [s.n_segments for s in report.scales] == [2, 4, 8]
        assert report.combined_dof == 44  # p^2 (2^(J+1) - 2 - J)
        total = sum(s.statistic for s in report.scales)
        assert report.combined_statistic == pytest.approx(total, rel=1e-12)
        for s in report.scales:
            assert 0.0 < s.p_value < 1.0

    def test_combined_dof_formula(self):
        stream = simulate_poisson([1.5], 2000.0, seed=4)
        for J in [1, 2, 4]:
            report = stationarity_test(stream, StationarityConfig(J=J))
            assert report.combined_dof == 1 * (2 ** (J + 1) - 2 - J)

    def test_j1_dof_is_p_squared(self):
        stream = simulate_poisson([2.0, 2.0], 1000.0, seed=5)
        report = stationarity_test(stream, StationarityConfig(J=1))
        assert report.scales[0].dof == 4

    def test_na_policy_for_empty_segment(self):
        # all events in the first half: at every scale some segment has a
        # singular periodogram, so every scale is NA and the combined test
        # degrades gracefully
        rng = np.random.default_rng(0)
        times = np.sort(rng.uniform(1.0, 500.0, 300))
        stream = EventStream([times, times + 0.25], T=1500.0)
        report = stationarity_test(stream, StationarityConfig(J=2))
        assert any(not s.valid for s in report.scales)
        excluded = [s.j for s in report.scales if not s.valid]
        assert report.meta["excluded_scales"] == excluded
        included_dof = sum(s.dof for s in report.scales if s.valid)
        assert report.combined_dof == included_dof

    def test_json_round_trip(self):
        import json
        stream = simulate_poisson([2.0, 2.0], 1500.0, seed=6)
        report = stationarity_test(stream, StationarityConfig(J=2))
        doc = json.loads(report.to_json())
        assert doc["combined"]["dof"] == report.combined_dof
        assert len(doc["scales"]) == 2
        assert doc["meta"]["c"] == 0.25

    def test_config_validation(self):
        stream = simulate_poisson([2.0], 100.0, seed=7)
        with pytest.raises(ConfigError):
            stationarity_test(stream, StationarityConfig(J=0))
        with pytest.raises(ConfigError):
            stationarity_test(stream, StationarityConfig(c=0.5))
        with pytest.raises(ConfigError):
            stationarity_test(stream, StationarityConfig(kappa=-1.0))

    def test_real_flavor_with_mexhat(self, mexhat):
        stream = simulate_poisson([2.0, 2.0], 1500.0, seed=8)
        report = stationarity_test(stream, StationarityConfig(
            wavelet=mexhat, J=2))
        assert report.meta["flavor"] == "real"
        assert all(s.p_value is not None for s in report.scales)


@pytest.fixture(scope="module")
def size_study():
    from eventspec.studies import run_test_size
    return run_test_size(rates=(4.0, 4.0), T=1500.0, kappa=6.0, c=0.25,
                         J=3, replicates=500, seed=1)


class TestNullStatisticDistribution:
    """-2 log Lambda_j against chi2_{nu_j} under a Poisson null at T=1500."""

    def test_chi2_ks_coarse_scales(self, size_study):
        # j = 1, 2: the chi-squared approximation error sits below the KS
        # resolution of 500 replicates
        assert size_study["chi2_ks_p"][0] > 0.01
        assert size_study["chi2_ks_p"][1] > 0.01

    @pytest.mark.xfail(
        strict=True,
        reason="At the finest tested scale (j=3, K=8 segments) the plain "
               "likelihood-ratio statistic carries the classical O(1/n) "
               "mean inflation (~5% here, no Bartlett correction in the "
               "method), which 500 replicates resolve: KS p ~ 1e-3 across "
               "seeds at T=1500. Consistent with the stated O(T^(-1/4)) "
               "convergence; the 5% rejection rate itself stays within the "
               "binomial band (acceptance criterion 9).")
    def test_chi2_ks_finest_scale(self, size_study):
        assert size_study["chi2_ks_p"][2] > 0.01
