import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from inference.summary import (
    CoverageSummary,
    IntervalEstimate,
    PosteriorDraws,
    coverage_stats,
    summarize,
    summarize_levels,
)
from utils.errors import DegenerateDraws, DomainError, EmptyInput, InsufficientDraws

chains = arrays(
    np.float64,
    st.integers(min_value=2, max_value=200),
    elements=st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, width=64),
).filter(lambda a: np.ptp(a) > 1e-6)


class TestPosteriorDraws:
    def test_read_only(self):
        draws = PosteriorDraws(np.arange(5.0))
        with pytest.raises(ValueError):
            draws.draws[0] = 1.0

    def test_shapes(self):
        assert PosteriorDraws(np.zeros(4)).levels == 1
        matrix = PosteriorDraws(np.arange(12.0).reshape(6, 2), {"seed": 1})
        assert matrix.levels == 2
        np.testing.assert_array_equal(matrix.level(1).draws, [1, 3, 5, 7, 9, 11])
        assert matrix.level(1).meta == {"seed": 1, "level": 1}

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(InsufficientDraws):
            PosteriorDraws(np.empty(0))
        with pytest.raises(DomainError):
            PosteriorDraws(np.array([0.0, np.inf]))
        with pytest.raises(DomainError):
            PosteriorDraws(np.zeros((2, 2, 2)))

    def test_equality(self):
        assert PosteriorDraws(np.ones(3), {"a": 1}) == PosteriorDraws(np.ones(3), {"a": 1})
        assert PosteriorDraws(np.ones(3), {"a": 1}) != PosteriorDraws(np.ones(3), {"a": 2})


class TestSummarize:
    def test_linear_interpolation_rule(self):
        interval = summarize(PosteriorDraws(np.arange(1.0, 101.0)), alpha=0.05)
        assert interval.lower == pytest.approx(3.475, abs=1e-12)
        assert interval.upper == pytest.approx(97.525, abs=1e-12)
        assert interval.point == 50.5
        assert interval.level == pytest.approx(0.95)

    def test_symmetric_draws(self):
        interval = summarize(PosteriorDraws(np.tile([-1.0, 1.0], 50)), alpha=0.5)
        assert interval.point == 0.0
        assert interval.lower == -interval.upper
        assert interval.contains(0.0)

    def test_sample_sd(self):
        interval = summarize(PosteriorDraws(np.array([1.0, 2.0, 3.0, 4.0])))
        assert interval.se == pytest.approx(math.sqrt(5.0 / 3.0))

    def test_constant_chain(self):
        with pytest.raises(DegenerateDraws):
            summarize(PosteriorDraws(np.full(10, 0.3)))

    def test_tails_collapse_to_one_value(self):
        with pytest.raises(DegenerateDraws):
            summarize(PosteriorDraws(np.append(np.zeros(99), 1.0)))

    def test_too_few_draws(self):
        with pytest.raises(InsufficientDraws):
            summarize(PosteriorDraws(np.array([1.0])))

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
    def test_alpha_range(self, alpha):
        with pytest.raises(DomainError):
            summarize(PosteriorDraws(np.arange(10.0)), alpha=alpha)

    def test_categorical_draws_need_levels(self):
        with pytest.raises(DomainError):
            summarize(PosteriorDraws(np.arange(10.0).reshape(5, 2)))

    @settings(max_examples=60, deadline=None)
    @given(chains, st.floats(min_value=0.01, max_value=0.5), st.floats(min_value=0.01, max_value=0.5))
    def test_smaller_alpha_gives_wider_interval(self, values, a, b):
        small, large = sorted((a, b))
        draws = PosteriorDraws(values)
        wide, narrow = summarize(draws, small), summarize(draws, large)
        assert wide.lower <= narrow.lower
        assert wide.upper >= narrow.upper

    @settings(max_examples=60, deadline=None)
    @given(chains, st.floats(min_value=-10.0, max_value=10.0))
    def test_shift_moves_point_and_bounds(self, values, c):
        base = summarize(PosteriorDraws(values))
        shifted = summarize(PosteriorDraws(values + c))
        assert shifted.point == pytest.approx(base.point + c, abs=1e-9)
        assert shifted.lower == pytest.approx(base.lower + c, abs=1e-9)
        assert shifted.upper == pytest.approx(base.upper + c, abs=1e-9)
        assert shifted.se == pytest.approx(base.se, rel=1e-6, abs=1e-9)


class TestSummarizeLevels:
    def test_binary(self):
        intervals = summarize_levels(PosteriorDraws(np.arange(10.0)))
        assert [i.term for i in intervals] == ["theta"]

    def test_one_interval_per_level(self):
        draws = np.column_stack([np.arange(20.0), np.arange(20.0) * 2.0])
        intervals = summarize_levels(PosteriorDraws(draws), alpha=0.1)
        assert [i.term for i in intervals] == ["theta[1]", "theta[2]"]
        assert intervals[1].point == pytest.approx(2.0 * intervals[0].point)


class TestIntervalEstimate:
    def test_rejects_reversed_bounds(self):
        with pytest.raises(DomainError):
            IntervalEstimate(point=0.0, se=1.0, lower=1.0, upper=-1.0, level=0.95)

    def test_to_dict(self):
        interval = IntervalEstimate(point=0.1, se=0.2, lower=-0.3, upper=0.5, level=0.9)
        assert interval.to_dict()["term"] == "theta"
        assert interval.length == pytest.approx(0.8)


def _interval(lower, upper):
    return IntervalEstimate(point=(lower + upper) / 2.0, se=1.0, lower=lower, upper=upper, level=0.95)


class TestCoverageStats:
    def test_single_interval(self):
        summary = coverage_stats([_interval(-1.0, 1.0)], [0.0], theta0=0.0)
        assert summary.coverage == 1.0
        assert summary.length == 2.0
        assert summary.count == 1

    def test_symmetric_errors_cancel(self):
        summary = coverage_stats([_interval(0.0, 0.8), _interval(0.2, 1.0)], [0.4, 0.6], theta0=0.5)
        assert summary.bias == 0.0
        assert summary.signed_bias == 0.0

    def test_bias_is_absolute(self):
        summary = coverage_stats([_interval(0.0, 1.0)], [0.2], theta0=0.5)
        assert summary.bias == pytest.approx(0.3)
        assert summary.signed_bias == pytest.approx(-0.3)

    def test_counts_misses(self):
        intervals = [_interval(-1.0, 1.0), _interval(2.0, 3.0), _interval(-0.5, 0.5), _interval(0.1, 0.2)]
        summary = coverage_stats(intervals, [0.0, 2.5, 0.0, 0.15], theta0=0.0)
        assert summary.coverage == 0.5

    def test_empty(self):
        with pytest.raises(EmptyInput):
            coverage_stats([], [], theta0=0.0)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            coverage_stats([_interval(-1.0, 1.0)], [0.0, 1.0], theta0=0.0)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=-5.0, max_value=5.0),
                st.floats(min_value=1e-3, max_value=5.0),
                st.floats(min_value=-5.0, max_value=5.0),
            ),
            min_size=1,
            max_size=40,
        ),
        st.randoms(use_true_random=False),
    )
    def test_permutation_invariant(self, rows, random):
        intervals = [_interval(lo, lo + width) for lo, width, _ in rows]
        points = [p for _, _, p in rows]
        order = list(range(len(rows)))
        random.shuffle(order)
        before = coverage_stats(intervals, points, theta0=0.25)
        after = coverage_stats([intervals[i] for i in order], [points[i] for i in order], theta0=0.25)
        assert before == after

    def test_mc_standard_error(self):
        assert CoverageSummary(0.95, 1.0, 0.0, 0.0, 1000).mc_se == pytest.approx(math.sqrt(0.95 * 0.05 / 1000))
