import math

import numpy as np
import pytest

from asyncov.errors import (
    FactorisationError,
    UnderpopulatedSeriesError,
    ValidationError,
)
from asyncov.simulate import (
    GbmSpec,
    gbm_paths,
    random_covariance,
    regular_nonsynchronous,
    sample_arrivals,
    sample_missing,
    substream,
)


def paper_bivariate(n, seed, dt=1.0 / 86400.0):
    rho = 0.35
    cov = rho * math.sqrt(0.1 * 0.2)
    return GbmSpec(
        n=n,
        mu=[0.01, 0.01],
        sigma_mat=np.array([[0.1, cov], [cov, 0.2]]),
        s0=[100.0, 100.0],
        dt=dt,
        seed=seed,
    )


class TestGbm:
    def test_deterministic_given_seed(self):
        a, _ = gbm_paths(paper_bivariate(500, 3))
        b, _ = gbm_paths(paper_bivariate(500, 3))
        np.testing.assert_array_equal(a, b)
        c, _ = gbm_paths(paper_bivariate(500, 4))
        assert not np.array_equal(a, c)

    def test_zero_vol_zero_drift_constant(self):
        spec = GbmSpec(n=50, mu=[0.0, 0.0], sigma_mat=np.zeros((2, 2)),
                       s0=[10.0, 20.0], dt=1.0, seed=0)
        prices, times = gbm_paths(spec)
        np.testing.assert_array_equal(prices[0], np.full(50, 10.0))
        np.testing.assert_array_equal(prices[1], np.full(50, 20.0))
        np.testing.assert_array_equal(times, np.arange(50.0))

    def test_sample_correlation_matches_induced(self):
        prices, _ = gbm_paths(paper_bivariate(100_000, 11))
        rets = np.diff(np.log(prices), axis=1)
        got = np.corrcoef(rets)[0, 1]
        assert abs(got - 0.35) < 0.02

    def test_log_return_moments(self):
        # lognormal solution: increments are N((mu - sigma^2/2) dt, sigma^2 dt)
        spec = paper_bivariate(100_000, 13)
        prices, _ = gbm_paths(spec)
        rets = np.diff(np.log(prices), axis=1)
        for i, var in enumerate((0.1, 0.2)):
            expected = (0.01 - 0.5 * var) * spec.dt
            se = math.sqrt(var * spec.dt) / math.sqrt(rets.shape[1])
            assert abs(np.mean(rets[i]) - expected) < 3 * se

    def test_singular_psd_matrix_accepted(self):
        # rank-1 covariance: both assets driven by the same factor
        sig = np.array([[0.04, 0.04], [0.04, 0.04]])
        spec = GbmSpec(n=200, mu=[0.0, 0.0], sigma_mat=sig, s0=[1.0, 1.0],
                       dt=1.0 / 200, seed=5)
        prices, _ = gbm_paths(spec)
        r = np.diff(np.log(prices), axis=1)
        np.testing.assert_allclose(r[0], r[1], rtol=1e-10)

    def test_indefinite_matrix_rejected(self):
        sig = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(FactorisationError):
            gbm_paths(GbmSpec(n=10, mu=[0.0, 0.0], sigma_mat=sig,
                              s0=[1.0, 1.0], dt=1.0, seed=0))

    def test_validation(self):
        with pytest.raises(ValidationError):
            GbmSpec(n=1, mu=[0.0], sigma_mat=[[0.1]], s0=[1.0], dt=1.0, seed=0)
        with pytest.raises(ValidationError):
            GbmSpec(n=5, mu=[0.0], sigma_mat=[[0.1]], s0=[-1.0], dt=1.0, seed=0)


class TestRandomCovariance:
    def test_diagonal_is_target_variance(self):
        mat = random_covariance(5, 1)
        np.testing.assert_allclose(np.diag(mat), np.full(5, 0.1))

    def test_off_diagonals_positive(self):
        for seed in range(5):
            mat = random_covariance(8, seed)
            off = mat[~np.eye(8, dtype=bool)]
            assert np.all(off > 0)

    def test_psd(self):
        for d, seed in ((2, 0), (10, 1), (25, 2)):
            mat = random_covariance(d, seed)
            assert np.linalg.eigvalsh(mat).min() >= -1e-12

    def test_needs_two_assets(self):
        with pytest.raises(ValidationError):
            random_covariance(1, 0)


class TestSampleMissing:
    def test_fraction_zero_identity(self):
        prices, times = gbm_paths(paper_bivariate(100, 2))
        out = sample_missing(prices, times, 0.0, 9)
        for i, s in enumerate(out):
            np.testing.assert_array_equal(s.times, times)
            np.testing.assert_array_equal(s.prices, prices[i])

    def test_exact_removal_count(self):
        prices, times = gbm_paths(paper_bivariate(10_000, 6))
        out = sample_missing(prices, times, 0.4, 10)
        assert [len(s) for s in out] == [6000, 6000]

    def test_first_observation_kept_and_values_exact(self):
        prices, times = gbm_paths(paper_bivariate(500, 7))
        out = sample_missing(prices, times, 0.3, 11)
        for i, s in enumerate(out):
            assert s.times[0] == 0.0
            idx = np.searchsorted(times, s.times)
            np.testing.assert_array_equal(s.prices, prices[i, idx])

    def test_removed_sets_differ_across_assets(self):
        prices, times = gbm_paths(paper_bivariate(1000, 8))
        a, b = sample_missing(prices, times, 0.5, 12)
        assert set(a.times) != set(b.times)

    def test_underpopulation(self):
        # removing floor(0.7 * 3) = 2 of 3 points leaves a single one
        prices, times = gbm_paths(paper_bivariate(3, 1))
        with pytest.raises(UnderpopulatedSeriesError):
            sample_missing(prices, times, 0.7, 0)


class TestSampleArrivals:
    def test_high_rate_covers_grid(self):
        prices, times = gbm_paths(paper_bivariate(2000, 3))
        out = sample_arrivals(prices, times, 1000.0, 4)  # lam*dt_grid = 1e3
        for s in out:
            assert len(s) >= 0.99 * len(times)

    def test_mean_interarrival(self):
        prices, times = gbm_paths(paper_bivariate(50_000, 5))
        lam = 1.0 / 25.0
        s = sample_arrivals(prices, times, lam, 6)[0]
        gaps = np.diff(s.times)
        se = np.std(gaps, ddof=1) / math.sqrt(gaps.size)
        assert abs(np.mean(gaps) - 25.0) < 3 * se

    def test_expected_series_lengths(self):
        prices, times = gbm_paths(paper_bivariate(10_000, 9))
        a, b = sample_arrivals(prices, times, [1 / 30.0, 1 / 45.0], 7)
        # ~Poisson(T/mean) arrivals; allow 4 standard deviations
        for s, mean in ((a, 30.0), (b, 45.0)):
            expected = 9999.0 / mean
            assert abs(len(s) - expected) < 4 * math.sqrt(expected) + 1

    def test_previous_tick_values(self):
        prices, times = gbm_paths(paper_bivariate(800, 10))
        s = sample_arrivals(prices, times, 1 / 15.0, 8)[0]
        grid_vals = set(prices[0].tolist())
        assert all(p in grid_vals for p in s.prices.tolist())
        # event times are real-valued (off the grid)
        assert np.any(s.times != np.round(s.times))

    def test_underpopulation_when_first_gap_beyond_horizon(self):
        prices, times = gbm_paths(paper_bivariate(10, 1))
        with pytest.raises(UnderpopulatedSeriesError):
            sample_arrivals(prices, times, 1e-9, 3)


class TestRegularNonsynchronous:
    def test_lengths(self):
        prices, times = gbm_paths(paper_bivariate(100, 1))
        a, b = regular_nonsynchronous(prices, times)
        assert (len(a), len(b)) == (100, 50)

    def test_even_indices(self):
        prices, times = gbm_paths(paper_bivariate(4, 2))
        a, b = regular_nonsynchronous(prices, times)
        assert b.times.tolist() == [0.0, 2.0]
        np.testing.assert_array_equal(a.times, times)
        np.testing.assert_array_equal(a.prices, prices[0])


class TestSubstreams:
    def test_substreams_independent_of_panel_width(self):
        # asset 0's missing-data draw does not change when D grows
        prices3, times = gbm_paths(
            GbmSpec(n=100, mu=np.zeros(3), sigma_mat=np.eye(3) * 0.1,
                    s0=np.full(3, 10.0), dt=0.01, seed=4)
        )
        prices2 = prices3[:2]
        a3 = sample_missing(prices3, times, 0.2, 5)[0]
        a2 = sample_missing(prices2, times, 0.2, 5)[0]
        np.testing.assert_array_equal(a3.times, a2.times)

    def test_named_generator(self):
        g = substream(1, 2, 3)
        assert "Philox" in type(g.bit_generator).__name__
