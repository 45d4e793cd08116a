"""Lag bookkeeping: boxes, conjugate pairing, Hermitian completion."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gencep import lags as lagmod

small_lag = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


class TestLagBasics:
    def test_as_lag_accepts_ints_in_one_dim(self):
        assert lagmod.as_lag(3, 1) == (3,)
        assert lagmod.as_lag((1, -2), 2) == (1, -2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            lagmod.as_lag((1, 2), 1)

    def test_lag_box_counts(self):
        assert len(lagmod.lag_box(2, 1)) == 5
        assert len(lagmod.lag_box(1, 2)) == 9

    def test_lag_box_is_sorted_and_symmetric(self):
        box = lagmod.lag_box(1, 2)
        assert box == sorted(box)
        assert all(lagmod.neg(k) in box for k in box)

    def test_positive_half_excludes_zero(self):
        box = lagmod.lag_box(2, 1)
        pos = lagmod.positive_half(box)
        assert pos == [(1,), (2,)]


class TestPositivity:
    @given(small_lag)
    @settings(max_examples=100, deadline=None)
    def test_exactly_one_of_pair_is_positive(self, k):
        """For k != 0 exactly one of k, -k counts as positive."""
        if lagmod.is_zero(k):
            assert not lagmod.is_positive(k)
        else:
            assert lagmod.is_positive(k) != lagmod.is_positive(lagmod.neg(k))

    def test_lexicographic_rule(self):
        assert lagmod.is_positive((0, 3))
        assert not lagmod.is_positive((0, -3))
        assert lagmod.is_positive((1, -5))


class TestHermitianFill:
    def test_fills_missing_conjugates(self):
        values = lagmod.hermitian_fill({(1,): 1.0 + 2.0j, (0,): 3.0})
        assert values[(-1,)] == 1.0 - 2.0j
        assert values[(0,)] == 3.0

    def test_zero_lag_forced_real(self):
        values = lagmod.hermitian_fill({(0,): 2.0 + 1e-12j})
        assert values[(0,)] == 2.0

    def test_conflicting_pair_rejected(self):
        with pytest.raises(ValueError):
            lagmod.hermitian_fill({(1,): 1.0 + 1.0j, (-1,): 1.0 + 1.0j})

    @given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    @settings(max_examples=50, deadline=None)
    def test_pair_consistency(self, z):
        values = lagmod.hermitian_fill({(2, -1): z})
        assert values[(-2, 1)] == complex(z).conjugate()
