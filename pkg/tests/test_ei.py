"""Closed-form expected improvement against pinned values and Monte Carlo."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellident.bayesopt import expected_improvement
from cellident.errors import NegativeVariance

PHI_AT_ZERO = 0.3989422804014327   # standard normal density at 0


class TestClosedForm:
    def test_pinned_value_at_zero_gap(self):
        # mean == best, unit variance: EI = sigma * phi(0)
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
            PHI_AT_ZERO, abs=1e-12)

    def test_pinned_value_at_unit_gap(self):
        # diff = 1, sigma = 1: EI = Phi(1) + phi(1)
        assert expected_improvement(-1.0, 1.0, 0.0) == pytest.approx(
            1.0833154705876864, abs=1e-12)

    def test_scales_with_sigma(self):
        assert expected_improvement(0.0, 4.0, 0.0) == pytest.approx(
            2.0 * PHI_AT_ZERO, abs=1e-12)

    def test_zero_variance_degenerates_to_hinge(self):
        assert expected_improvement(1.0, 0.0, 3.0) == 2.0
        assert expected_improvement(5.0, 0.0, 3.0) == 0.0
        assert expected_improvement(1.0, 0.0, 3.0, xi=0.5) == 1.5

    def test_vector_and_scalar_interfaces(self):
        means = np.array([0.0, 1.0, 2.0])
        out = expected_improvement(means, np.ones(3), 1.0)
        assert out.shape == (3,)
        assert out[0] > out[1] > out[2]
        assert isinstance(expected_improvement(0.0, 1.0, 1.0), float)

    def test_non_negative_everywhere(self):
        means = np.linspace(-5, 5, 41)
        out = expected_improvement(means, np.full(41, 0.3), 0.0)
        assert np.all(out >= 0.0)

    @settings(max_examples=100, deadline=None)
    @given(mean=st.floats(-10, 10), var=st.floats(0, 25),
           best=st.floats(-10, 10))
    def test_dominates_zero_variance_bound(self, mean, var, best):
        """EI is never below the deterministic improvement max(0, best-mean)."""
        ei = expected_improvement(mean, var, best)
        assert ei >= max(0.0, best - mean) - 1e-12

    def test_monotone_in_mean_and_variance(self):
        assert (expected_improvement(0.0, 1.0, 0.0)
                > expected_improvement(0.5, 1.0, 0.0))
        assert (expected_improvement(1.0, 4.0, 0.0)
                > expected_improvement(1.0, 1.0, 0.0))


class TestGuards:
    def test_negative_variance_below_tolerance(self):
        with pytest.raises(NegativeVariance):
            expected_improvement(0.0, -1e-9, 1.0)

    def test_tiny_negative_variance_clamped(self):
        assert expected_improvement(0.0, -1e-13, 1.0) == pytest.approx(1.0)

    def test_negative_xi_rejected(self):
        with pytest.raises(ValueError):
            expected_improvement(0.0, 1.0, 0.0, xi=-0.1)


class TestMonteCarlo:
    @pytest.mark.parametrize("mean,var,best,xi", [
        (0.0, 1.0, 0.0, 0.0),
        (-1.0, 0.25, 0.0, 0.0),
        (0.5, 4.0, 0.0, 0.0),
        (2.0, 1.0, 1.0, 0.1),
        (-0.3, 0.04, 0.0, 0.0),
    ])
    def test_matches_sampled_expectation(self, mean, var, best, xi):
        rng = np.random.default_rng(12345)
        draws = rng.normal(mean, np.sqrt(var), size=200_000)
        improvements = np.maximum(best - draws - xi, 0.0)
        mc = improvements.mean()
        se = improvements.std(ddof=1) / np.sqrt(improvements.size)
        ei = expected_improvement(mean, var, best, xi)
        assert abs(ei - mc) <= 4.0 * se
