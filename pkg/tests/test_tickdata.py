import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asyncov.errors import (
    DegenerateSpacingError,
    DegenerateSpanError,
    ParseError,
    UnderpopulatedSeriesError,
    ValidationError,
)
from asyncov.tickdata import (
    TWO_PI,
    EventSeries,
    ingest_taq,
    log_returns,
    nyquist_cutoff,
    rescale_times,
)
from asyncov.tickdata import ReturnSeries


def make_series(times, prices, asset="A"):
    return EventSeries(asset, np.asarray(times, float), np.asarray(prices, float))


class TestEventSeries:
    def test_strips_missing_pairs(self):
        s = EventSeries("A", [0.0, 1.0, np.nan, 3.0], [10.0, np.nan, 12.0, 13.0])
        assert s.times.tolist() == [0.0, 3.0]
        assert s.prices.tolist() == [10.0, 13.0]

    def test_rejects_nonpositive_price(self):
        with pytest.raises(ValidationError):
            make_series([0, 1], [1.0, -2.0])

    def test_rejects_unordered_times(self):
        with pytest.raises(ValidationError):
            make_series([1, 0], [1.0, 2.0])

    def test_rejects_short_series(self):
        with pytest.raises(UnderpopulatedSeriesError):
            make_series([0], [1.0])

    def test_immutable(self):
        s = make_series([0, 1], [1.0, 2.0])
        with pytest.raises(ValueError):
            s.times[0] = 5.0


class TestRescale:
    def test_endpoints_and_midpoint(self):
        panel = rescale_times([make_series([0, 5, 10], [1, 1, 1])])
        assert panel.rescaled["A"] == pytest.approx([0.0, math.pi, TWO_PI])

    def test_affine_map_values(self):
        # direct evaluation of 2*pi*(t - 1)/(4 - 1) at t = 1, 2, 4
        panel = rescale_times([make_series([1, 2, 4], [1, 1, 1])])
        assert panel.rescaled["A"] == pytest.approx([0.0, TWO_PI / 3.0, TWO_PI])

    def test_global_min_maps_to_zero(self):
        a = make_series([3, 5], [1, 1], "A")
        b = make_series([1, 4], [1, 1], "B")
        panel = rescale_times([a, b])
        assert panel.rescaled["B"][0] == 0.0
        assert panel.rescaled["A"][-1] == TWO_PI
        assert panel.t_span == 4.0

    def test_degenerate_span(self):
        a = make_series([1, 2], [1, 1])
        with pytest.raises(DegenerateSpanError):
            rescale_times([a], t_min=5.0, t_max=5.0)

    @given(
        st.lists(
            st.integers(min_value=-10**9, max_value=10**9),
            min_size=2,
            max_size=30,
            unique=True,
        )
    )
    def test_order_preserving(self, raw_times):
        # second-resolution timestamps, the documented input contract
        times = sorted(float(t) for t in raw_times)
        s = make_series(times, np.ones(len(times)))
        out = rescale_times([s]).rescaled["A"]
        assert np.all(np.diff(out) > 0)
        assert out[0] == 0.0
        assert out[-1] == pytest.approx(TWO_PI)


class TestLogReturns:
    def test_constant_price(self):
        s = make_series([0, 1, 2], [5.0, 5.0, 5.0])
        rs = log_returns(s, rescale_times([s]))
        assert rs.deltas.tolist() == [0.0, 0.0]

    def test_single_e_ratio(self):
        s = make_series([0, 7], [100.0, 100.0 * math.e])
        rs = log_returns(s, rescale_times([s]))
        assert rs.deltas == pytest.approx([1.0])
        assert rs.times.tolist() == [0.0]
        assert rs.n_returns == 1

    def test_matches_scripted_ln_diff(self):
        # ten-point fixture; oracle is a plain math.log difference list
        rng = np.random.default_rng(7)
        prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, 10)))
        times = np.arange(10.0)
        expected = [
            math.log(prices[i + 1]) - math.log(prices[i]) for i in range(9)
        ]
        s = make_series(times, prices)
        rs = log_returns(s, rescale_times([s]))
        assert rs.deltas == pytest.approx(expected, abs=1e-15)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=50)
    def test_price_scale_invariance(self, c):
        rng = np.random.default_rng(11)
        prices = 50.0 * np.exp(np.cumsum(rng.normal(0, 0.02, 8)))
        s1 = make_series(np.arange(8.0), prices)
        s2 = make_series(np.arange(8.0), c * prices)
        panel = rescale_times([s1])
        d1 = log_returns(s1, panel).deltas
        d2 = log_returns(s2, panel).deltas
        assert d1 == pytest.approx(d2, abs=1e-12)


class TestNyquist:
    def test_uniform_grid(self):
        # gap 2*pi/(n-1) over [0, 2*pi] -> N = floor((n-1)/2)
        for n in (9, 10, 101):
            t = np.linspace(0.0, TWO_PI, n)
            rs = ReturnSeries("A", t[:-1], np.zeros(n - 1))
            # include the right endpoint gap by using the full time grid
            full = ReturnSeries("A", t, np.zeros(n))
            assert nyquist_cutoff([full]) == (n - 1) // 2

    def test_synchronous_convention(self):
        # when the gap is 2*pi/n the cutoff is n/2
        n = 10
        t = np.arange(n) * (TWO_PI / n)
        rs = ReturnSeries("A", t, np.zeros(n))
        assert nyquist_cutoff([rs]) == n // 2

    def test_min_gap_quarter_pi(self):
        t = np.array([0.0, math.pi / 4.0, 3.0 * math.pi / 4.0])
        rs = ReturnSeries("A", t, np.zeros(3))
        assert nyquist_cutoff([rs]) == 4

    def test_min_across_assets(self):
        t1 = np.arange(101) * (TWO_PI / 101)  # N = 50
        gap = TWO_PI / 63.0
        t2 = np.arange(63) * gap  # N0 = 63 -> N = 31
        r1 = ReturnSeries("A", t1, np.zeros(101))
        r2 = ReturnSeries("B", t2, np.zeros(63))
        assert nyquist_cutoff([r1]) == 50
        assert nyquist_cutoff([r2]) == 31
        assert nyquist_cutoff([r1, r2]) == 31

    def test_zero_gap_rejected(self):
        rs = ReturnSeries("A", [0.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        with pytest.raises(DegenerateSpacingError):
            nyquist_cutoff([rs])

    def test_thinning_never_increases_cutoff(self):
        rng = np.random.default_rng(3)
        t = np.sort(rng.uniform(0, TWO_PI, 40))
        rs = ReturnSeries("A", t, np.zeros(40))
        n_full = nyquist_cutoff([rs])
        thinned = ReturnSeries("A", t[::2], np.zeros(20))
        assert nyquist_cutoff([thinned]) <= n_full


LONG_TEXT = """asset,time,price,volume
X,0,100,1
X,0,102,3
X,10,101,2
Y,0,50,1
Y,5,51,1
"""


class TestIngest:
    def test_vwap_merge(self):
        series = ingest_taq(io.StringIO(LONG_TEXT))
        x = series[0]
        assert x.asset_id == "X"
        # (100*1 + 102*3) / 4
        assert x.prices[0] == pytest.approx(101.5)
        assert len(x) == 2

    def test_wide_missing_cell_absent(self):
        text = "time,X,Y\n0,100,50\n1,,51\n2,101,52\n"
        series = ingest_taq(io.StringIO(text))
        x, y = series
        assert x.times.tolist() == [0.0, 2.0]
        assert y.times.tolist() == [0.0, 1.0, 2.0]

    def test_committed_fixture_series_lengths(self, taq3_path):
        # hand-count on the fixture: A1 carries 2 duplicated timestamps,
        # A2 none, A3 three, 50 rows each
        series, diag = ingest_taq(taq3_path, return_diagnostics=True)
        lengths = {s.asset_id: len(s) for s in series}
        assert lengths == {"A1": 48, "A2": 50, "A3": 47}
        assert diag.rows_read == 150
        assert sum(diag.merged_duplicates.values()) == 5

    def test_idempotent_on_deduplicated_input(self, taq3_path):
        series = ingest_taq(taq3_path)
        text = "asset,time,price,volume\n" + "".join(
            f"{s.asset_id},{float(t)!r},{float(p)!r},1\n"
            for s in series
            for t, p in zip(s.times, s.prices)
        )
        again = ingest_taq(io.StringIO(text))
        for a, b in zip(series, again):
            assert a.asset_id == b.asset_id
            np.testing.assert_allclose(a.times, b.times)
            np.testing.assert_allclose(a.prices, b.prices, rtol=0, atol=0)

    def test_malformed_row_carries_line_number(self):
        text = "asset,time,price,volume\nX,0,100,1\nX,zap,100,1\n"
        with pytest.raises(ParseError, match="line 3"):
            ingest_taq(io.StringIO(text))

    def test_nonpositive_price_rejected(self):
        text = "asset,time,price,volume\nX,0,-1,1\nX,1,2,1\n"
        with pytest.raises(ValidationError):
            ingest_taq(io.StringIO(text))

    def test_underpopulated_asset_rejected(self):
        text = "asset,time,price,volume\nX,0,1,1\nY,0,1,1\nY,1,2,1\n"
        with pytest.raises(UnderpopulatedSeriesError):
            ingest_taq(io.StringIO(text))
