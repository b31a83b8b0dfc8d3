import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asyncov.errors import DimensionMismatchError, ValidationError
from asyncov.fourier import FourierCoeffs, coeffs_forloop, coeffs_vectorised
from asyncov.tickdata import ReturnSeries

from conftest import TWO_PI, oracle_coeffs, random_return_series


def rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestFourierCoeffs:
    def test_layout(self):
        c = FourierCoeffs(2, np.arange(5, dtype=complex))
        assert c.k_values.tolist() == [-2, -1, 0, 1, 2]
        assert c.c_minus == pytest.approx(np.conj(c.c_plus))

    def test_length_must_match(self):
        with pytest.raises(DimensionMismatchError):
            FourierCoeffs(2, np.zeros(4, dtype=complex))

    def test_restrict_keeps_central_modes(self):
        c = FourierCoeffs(3, np.arange(7, dtype=complex))
        r = c.restrict(1)
        assert r.c_plus.tolist() == [2, 3, 4]
        with pytest.raises(DimensionMismatchError):
            c.restrict(4)


class TestForLoop:
    def test_single_unit_source_at_origin(self):
        rs = ReturnSeries("A", [0.0], [1.0])
        c = coeffs_forloop(rs, 5)
        assert c.c_plus == pytest.approx(np.ones(11, dtype=complex))

    def test_zero_deltas(self):
        rs = random_return_series(0, n=16)
        rs = ReturnSeries("A", rs.times, np.zeros(16))
        c = coeffs_forloop(rs, 4)
        assert np.all(c.c_plus == 0)

    def test_matches_bruteforce_oracle(self):
        rs = random_return_series(21, n=20)
        expected = oracle_coeffs(rs.times, rs.deltas, 8)
        got = coeffs_forloop(rs, 8).c_plus
        assert rel_l2(got, expected) < 1e-13

    def test_mode_zero_is_delta_sum(self):
        rs = random_return_series(5, n=33)
        c = coeffs_forloop(rs, 3)
        assert c.c_plus[3] == pytest.approx(np.sum(rs.deltas), abs=1e-15)

    def test_empty_series_rejected(self):
        rs = ReturnSeries("A", [], [])
        with pytest.raises(ValidationError):
            coeffs_forloop(rs, 2)

    def test_hermitian_symmetry(self):
        rs = random_return_series(9, n=50)
        c = coeffs_forloop(rs, 12).c_plus
        flipped = np.conj(c[::-1])
        assert np.max(np.abs(c - flipped)) < 1e-12 * np.linalg.norm(c)

    def test_linearity(self):
        rs1 = random_return_series(1, n=25)
        rs2 = ReturnSeries("A", rs1.times, np.cos(rs1.times))
        both = ReturnSeries("A", rs1.times, rs1.deltas + rs2.deltas)
        c1 = coeffs_forloop(rs1, 6).c_plus
        c2 = coeffs_forloop(rs2, 6).c_plus
        c12 = coeffs_forloop(both, 6).c_plus
        assert c12 == pytest.approx(c1 + c2, rel=1e-12, abs=1e-14)

    def test_time_shift_multiplies_by_phase(self):
        rs = random_return_series(13, n=10)
        shifted = ReturnSeries("A", rs.times / 2.0 + math.pi, rs.deltas)
        base = ReturnSeries("A", rs.times / 2.0, rs.deltas)
        n = 4
        c0 = coeffs_forloop(base, n).c_plus
        c1 = coeffs_forloop(shifted, n).c_plus
        ks = np.arange(-n, n + 1)
        assert c1 == pytest.approx(c0 * np.exp(1j * ks * math.pi), rel=1e-12, abs=1e-14)


class TestVectorised:
    def test_identical_to_forloop(self):
        rs = random_return_series(2, n=40)
        a = coeffs_forloop(rs, 10).c_plus
        b = coeffs_vectorised(rs, 10).c_plus
        assert rel_l2(b, a) < 1e-14

    def test_mode_zero_exact(self):
        rs = random_return_series(3, n=17)
        c = coeffs_vectorised(rs, 5)
        assert c.c_plus[5] == np.sum(rs.deltas) + 0j

    def test_hermitian_by_construction(self):
        rs = random_return_series(4, n=30)
        c = coeffs_vectorised(rs, 7).c_plus
        assert np.max(np.abs(c - np.conj(c[::-1]))) == 0.0

    def test_gbm_returns_large_cutoff(self):
        rng = np.random.default_rng(77)
        n = 1000
        prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, n + 1)))
        t = np.arange(n, dtype=float) * (TWO_PI / n)
        rs = ReturnSeries("A", t, np.diff(np.log(prices)))
        a = coeffs_forloop(rs, 500).c_plus
        b = coeffs_vectorised(rs, 500).c_plus
        assert rel_l2(b, a) < 1e-13

    def test_cutoff_zero(self):
        rs = random_return_series(6, n=12)
        c = coeffs_vectorised(rs, 0)
        assert c.c_plus.shape == (1,)
        assert c.c_plus[0] == np.sum(rs.deltas) + 0j

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=20, deadline=None)
    def test_engines_agree_on_random_inputs(self, seed):
        rs = random_return_series(seed, n=24)
        a = coeffs_forloop(rs, 9).c_plus
        b = coeffs_vectorised(rs, 9).c_plus
        assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, np.linalg.norm(a))
