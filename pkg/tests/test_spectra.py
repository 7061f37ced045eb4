import csv
import json
import math

import numpy as np
import pytest

from eventspec import (ConfigError, EventStream, FieldConfig,
                       RegionError, SmoothedKernel, SmoothingWindow,
                       UndefinedCoherenceError, Wavelet, analyzing_frequency,
                       coherence, cwt, denormalize_coords, eigensystem_cached,
                       field, normalize_coords, nystrom_decompose,
                       periodogram, simulate_poisson,
                       smoothed_periodogram_direct, smoothed_periodogram_eigen)
from eventspec.studies import piecewise_segments


def empty_stream(p=2, T=100.0):
    return EventStream([np.array([])] * p, T)


class TestCwt:
    def test_empty_stream(self, morlet):
        w = cwt(empty_stream(), morlet, 2.0, 50.0)
        assert np.all(w == 0)

    def test_single_event_at_centre(self, morlet):
        for a in [1.0, 3.0]:
            s = EventStream([[50.0]], T=100.0)
            w = cwt(s, morlet, a, 50.0)
            assert w[0] == pytest.approx(a ** -0.5 * np.pi ** -0.25, abs=1e-4)

    def test_two_symmetric_events_mexhat(self, mexhat):
        a, b, delta = 2.0, 50.0, 1.4
        s = EventStream([[b - delta, b + delta]], T=100.0)
        w = cwt(s, mexhat, a, b)
        # real even wavelet: two equal terms
        expected = 2.0 * mexhat(delta / a) / math.sqrt(a)
        assert w[0] == pytest.approx(expected, abs=1e-12)
        assert w[0].imag == 0.0 if np.iscomplexobj(w) else True

    def test_region_enforced(self, morlet):
        s = empty_stream(1)
        with pytest.raises(RegionError):
            cwt(s, morlet, 5.0, 2.0)  # support spills below 0


class TestPeriodogram:
    def test_empty_zero_matrix(self, morlet):
        W = periodogram(empty_stream(), morlet, 2.0, 50.0)
        assert np.all(W == 0)

    def test_outer_product_identities(self, morlet):
        s = simulate_poisson([2.0, 3.0], 100.0, seed=5)
        W = periodogram(s, morlet, 2.0, 50.0)
        w = cwt(s, morlet, 2.0, 50.0)
        assert np.abs(W - W.conj().T).max() < 1e-12
        eigs = np.sort(np.linalg.eigvalsh(W))
        assert eigs[-1] == pytest.approx(float(np.sum(np.abs(w) ** 2)), rel=1e-10)
        assert abs(eigs[0]) < 1e-10 * eigs[-1]  # rank one
        assert np.trace(W).real == pytest.approx(float(np.sum(np.abs(w) ** 2)))

    def test_unsmoothed_coherence_is_one(self, morlet):
        s = simulate_poisson([2.0, 3.0], 100.0, seed=6)
        W = periodogram(s, morlet, 2.0, 50.0)
        assert coherence(W, 0, 1) == pytest.approx(1.0, abs=1e-12)


class TestSmoothedPeriodogram:
    def test_empty_stream_zero(self, morlet_sys10):
        om = smoothed_periodogram_eigen(empty_stream(), morlet_sys10, 2.0, 50.0)
        assert np.all(om == 0)

    def test_single_pair_term(self, morlet_sys10):
        kern = morlet_sys10.kernel
        s = EventStream([[49.0], [51.0]], T=100.0)
        a, b = 2.0, 50.0
        om = smoothed_periodogram_direct(s, kern, a, b)
        expected = kern.value_matrix(np.array([(49.0 - b) / a]),
                                     np.array([(51.0 - b) / a]))[0, 0] / a
        assert om[0, 1] == pytest.approx(expected, abs=1e-12)
        assert om[1, 0] == pytest.approx(np.conj(expected), abs=1e-12)

    @pytest.mark.parametrize("kind", ["morlet", "mexhat"])
    def test_direct_matches_eigen(self, kind):
        system = eigensystem_cached(kind, 10.0, energy_cutoff=1.0 - 1e-8)
        s = simulate_poisson([4.0, 4.0], 120.0, seed=9)
        a, b = denormalize_coords(0.5, 0.5, 120.0, 8.0, 10.0)
        om_d = smoothed_periodogram_direct(s, system.kernel, a, b)
        om_e = smoothed_periodogram_eigen(s, system, a, b)
        rel = np.linalg.norm(om_d - om_e) / np.linalg.norm(om_d)
        assert rel < 1e-6

    def test_region_error_outside_triangle(self, morlet_sys10):
        s = simulate_poisson([2.0], 100.0, seed=1)
        with pytest.raises(RegionError):
            smoothed_periodogram_eigen(s, morlet_sys10, 3.0, 5.0)

    def test_psd_on_poisson_draws(self, morlet_sys10):
        worst = 0.0
        for r in range(100):
            s = simulate_poisson([3.0, 3.0], 80.0, seed=100 + r)
            om = smoothed_periodogram_eigen(s, morlet_sys10, 2.0, 40.0)
            eigs = np.linalg.eigvalsh(om)
            worst = min(worst, eigs.min() / max(np.trace(om).real, 1e-300))
        assert worst >= -1e-10

    def test_rank_one_system_reduces_to_periodogram(self, morlet):
        system = nystrom_decompose(SmoothedKernel.rank_one(morlet))
        s = simulate_poisson([3.0], 100.0, seed=2)
        a, b = 3.0, 50.0
        om = smoothed_periodogram_eigen(s, system, a, b)
        W = periodogram(s, morlet, a, b)
        # v is the unconjugated transform, so the rank-one system gives the
        # transpose of w w^H; diagonals and magnitudes coincide
        assert om[0, 0] == pytest.approx(W[0, 0], rel=1e-6)


class TestCoherence:
    def test_diagonal_matrix_zero(self):
        om = np.diag([2.0, 3.0]).astype(complex)
        assert coherence(om, 0, 1) == 0.0

    def test_rank_one_unity(self):
        v = np.array([1.0 + 0.5j, -0.3 + 2.0j])
        om = np.outer(v, v.conj())
        assert coherence(om, 0, 1) == pytest.approx(1.0, abs=1e-12)

    def test_zero_diagonal_raises(self):
        om = np.zeros((2, 2), dtype=complex)
        with pytest.raises(UndefinedCoherenceError):
            coherence(om, 0, 1)


class TestCoordinates:
    def test_apex_maps_to_unit(self):
        T, alpha, kappa = 100.0, 8.0, 20.0
        a = T / (alpha + kappa)
        at, bt = normalize_coords(a, T / 2, T, alpha, kappa)
        assert (at, bt) == pytest.approx((1.0, 0.5))

    def test_round_trip(self):
        T, alpha, kappa = 321.0, 8.0, 11.5
        a, b = denormalize_coords(0.37, 0.81, T, alpha, kappa)
        at, bt = normalize_coords(a, b, T, alpha, kappa)
        assert at == pytest.approx(0.37, abs=1e-12)
        assert bt == pytest.approx(0.81, abs=1e-12)

    def test_scale_mapping_example(self):
        a, _ = denormalize_coords(0.8, 0.5, 100.0, 8.0, 20.0)
        assert a == pytest.approx(80.0 / 28.0, abs=1e-12)

    def test_analyzing_frequency(self):
        assert analyzing_frequency(1.0, 4.0) == 0.25


class TestField:
    def make_config(self, **kw):
        defaults = dict(wavelet=Wavelet.morlet(),
                        window=SmoothingWindow.rectangular(10.0),
                        energy_cutoff=0.999)
        defaults.update(kw)
        return FieldConfig(**defaults)

    def test_all_outside_raises(self):
        s = simulate_poisson([2.0, 2.0], 50.0, seed=3)
        cfg = self.make_config(a_grid=np.array([10.0, 20.0]),
                               b_grid=np.array([25.0]))
        with pytest.raises(ConfigError):
            field(s, cfg)

    def test_singleton_grid_matches_pointwise(self):
        s = simulate_poisson([2.0, 2.0], 100.0, seed=4)
        a, b = 2.0, 50.0
        cfg = self.make_config(a_grid=np.array([a]), b_grid=np.array([b]))
        result = field(s, cfg)
        assert result.valid[0, 0]
        om = smoothed_periodogram_eigen(s, cfg.system, a, b)
        assert np.abs(result.omega[0, 0] - om).max() < 1e-12
        assert result.gamma2[0, 0, 0, 1] == pytest.approx(coherence(om, 0, 1))

    def test_invalid_points_masked(self):
        s = simulate_poisson([2.0, 2.0], 100.0, seed=4)
        cfg = self.make_config(a_grid=np.array([2.0, 5.6]),  # a_max = 100/18
                               b_grid=np.array([50.0]))
        result = field(s, cfg)
        assert result.valid[0, 0] and not result.valid[1, 0]
        assert np.isnan(result.gamma2[1, 0, 0, 1])

    def test_auto_grid_and_meta(self):
        s = simulate_poisson([2.0, 2.0], 200.0, seed=8)
        cfg = self.make_config(n_a=6, n_b=10)
        result = field(s, cfg)
        assert result.valid.any()
        meta = json.loads(result.meta_json())
        assert meta["p"] == 2 and meta["T"] == 200.0
        assert meta["dof"] == pytest.approx(4.335, abs=0.01)

    def test_csv_round_trip(self, tmp_path):
        s = simulate_poisson([2.0, 2.0], 100.0, seed=4)
        cfg = self.make_config(a_grid=np.array([2.0]), b_grid=np.array([50.0]))
        result = field(s, cfg)
        path = tmp_path / "field.csv"
        result.to_csv(path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4  # p^2 rows for the single grid point
        row01 = next(r for r in rows if r["i"] == "1" and r["j"] == "2")
        om = result.omega[0, 0, 0, 1]
        assert float(row01["re"]) == pytest.approx(om.real)
        assert float(row01["im"]) == pytest.approx(om.imag)
        assert int(row01["valid"]) == 1

    def test_piecewise_coherence_concentrates_in_coupled_window(self):
        # single realization of the piecewise design: the share of
        # above-threshold coherence values at coarse scales should be
        # clearly higher over the mutually exciting middle third
        stream = __import__("eventspec").simulate_piecewise(
            piecewise_segments(), seed=77)
        cfg = self.make_config(n_a=8, n_b=48)
        result = field(stream, cfg)
        thresh = 0.593
        coarse = result.a_grid >= np.median(result.a_grid)
        inside_frac = []
        outside_frac = []
        for ia in np.nonzero(coarse)[0]:
            for ib, b in enumerate(result.b_grid):
                if not result.valid[ia, ib]:
                    continue
                g = result.gamma2[ia, ib, 0, 1]
                (inside_frac if 500.0 < b <= 1000.0 else outside_frac).append(
                    g > thresh)
        assert np.mean(inside_frac) > np.mean(outside_frac) + 0.2


class TestMeanSpectrum:
    def test_poisson_mean_omega(self, morlet_sys10):
        lam = 5.0
        vals = np.empty(200)
        a, b = denormalize_coords(0.5, 0.5, 100.0, 8.0, 10.0)
        for r in range(200):
            s = simulate_poisson([lam], 100.0,
                                 seed=np.random.SeedSequence(entropy=31, spawn_key=(r,)))
            vals[r] = smoothed_periodogram_eigen(s, morlet_sys10, a, b)[0, 0].real
        se = vals.std(ddof=1) / math.sqrt(vals.size)
        assert abs(vals.mean() - lam) < 3 * se
