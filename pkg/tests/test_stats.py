"""
Unit tests for the stats module.
"""

import math
import unittest

import numpy as np

from src.errors import NonPositiveGap
from src.stats import (fit_exponential_rate, fit_rate, median_of_means, numerical_floor,
                       standard_error, trimmed_mean)

GRID = [2 ** k for k in range(6, 15)]


class TestEstimators(unittest.TestCase):
    """Test suite for the location estimators."""

    def test_standard_error(self):
        """Test sd / sqrt(n) and 0 for a single value."""
        self.assertAlmostEqual(standard_error([1.0, 3.0]), 1.0)
        self.assertEqual(standard_error([5.0]), 0.0)

    def test_median_of_means_constant(self):
        """Test that a constant sample returns the constant."""
        self.assertEqual(median_of_means([2.0] * 100), 2.0)

    def test_median_of_means_resists_outlier(self):
        """Test that one huge value moves only one block mean."""
        values = [1.0] * 99 + [1e9]
        self.assertEqual(median_of_means(values), 1.0)
        self.assertGreater(float(np.mean(values)), 1e6)

    def test_median_of_means_small_sample(self):
        """Test that blocks are clipped to the sample size."""
        self.assertEqual(median_of_means([1.0, 2.0, 3.0]), 2.0)
        with self.assertRaises(ValueError):
            median_of_means([])

    def test_trimmed_mean(self):
        """Test that 1% trimming removes a single extreme value out of 100."""
        values = list(range(1, 100)) + [10_000]
        self.assertAlmostEqual(trimmed_mean(values), float(np.mean(range(2, 100))))

    def test_numerical_floor(self):
        """Test 1e3 eps max(1, |F*|)."""
        eps = float(np.finfo(float).eps)
        self.assertEqual(numerical_floor(0.0), 1e3 * eps)
        self.assertEqual(numerical_floor(-10.0), 1e4 * eps)


class TestFitRate(unittest.TestCase):
    """Test suite for the log-log rate fit."""

    def test_exact_square_root(self):
        """Test slope -1/2 and r^2 = 1 on C / sqrt(T)."""
        fit = fit_rate([(T, 3.0 / math.sqrt(T)) for T in GRID])
        self.assertAlmostEqual(fit.slope, -0.5, places=10)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=10)
        self.assertAlmostEqual(fit.intercept, math.log(3.0), places=9)
        self.assertAlmostEqual(fit.curvature, 0.0, places=8)

    def test_exact_inverse(self):
        """Test slope -1 on C / T."""
        fit = fit_rate([(T, 1.0 / T) for T in GRID])
        self.assertAlmostEqual(fit.slope, -1.0, places=10)

    def test_log_factor_flattens_slope(self):
        """Test that ln(T) / sqrt(T) fits a slope of about -0.3495 on 2^6..2^14."""
        fit = fit_rate([(T, 0.7 * math.log(T) / math.sqrt(T)) for T in GRID])
        self.assertAlmostEqual(fit.slope, -0.3495, delta=1e-3)
        self.assertGreater(fit.slope, -0.5)
        self.assertGreater(fit.r_squared, 0.99)
        self.assertLess(fit.curvature, 0.0)

    def test_non_positive_gap(self):
        """Test that a zero gap cannot be fitted."""
        with self.assertRaises(NonPositiveGap):
            fit_rate([(64, 1.0), (128, 0.5), (256, 0.0), (512, 0.1)])

    def test_too_few_points(self):
        """Test that three points are not enough."""
        with self.assertRaises(ValueError):
            fit_rate([(64, 1.0), (128, 0.5), (256, 0.25)])

    def test_floor_drops_points(self):
        """Test that points under the floor are excluded and reported."""
        points = [(T, 1.0 / T) for T in GRID] + [(2 ** 15, 1e-20)]
        with self.assertLogs("src.stats", level="WARNING"):
            fit = fit_rate(points, floor=1e-13)
        self.assertEqual(fit.dropped, (2 ** 15,))
        self.assertAlmostEqual(fit.slope, -1.0, places=10)

    def test_negative_gap_with_floor(self):
        """Test that a floor never hides a gap that is negative beyond rounding."""
        points = [(T, 1.0 / T) for T in GRID] + [(2 ** 15, -1e-3)]
        with self.assertRaises(NonPositiveGap):
            fit_rate(points, floor=1e-13)

    def test_rounding_level_gap_dropped(self):
        """Test that gaps inside [-floor, floor) are dropped with a warning."""
        points = [(T, 1.0 / T) for T in GRID] + [(2 ** 15, 0.0), (2 ** 16, -1e-14)]
        with self.assertLogs("src.stats", level="WARNING"):
            fit = fit_rate(points, floor=1e-13)
        self.assertEqual(fit.dropped, (2 ** 15, 2 ** 16))

    def test_standard_errors_are_carried(self):
        """Test that the given standard errors are stored with the fit."""
        fit = fit_rate([(T, 1.0 / T) for T in GRID], se=[0.01] * len(GRID))
        self.assertEqual(fit.se, tuple([0.01] * len(GRID)))
        self.assertEqual(fit.T, tuple(GRID))


class TestFitExponentialRate(unittest.TestCase):
    """Test suite for the semi-log fit of linear convergence."""

    def test_exact_exponential(self):
        """Test slope ln(0.9) on 0.9^T."""
        fit = fit_exponential_rate([(T, 0.9 ** T) for T in range(10, 160, 10)])
        self.assertAlmostEqual(fit.slope, math.log(0.9), places=10)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=10)

    def test_floor(self):
        """Test that a floor leaves at least three points or raises."""
        points = [(T, 10.0 ** (-T)) for T in (1, 2, 3, 20, 30)]
        with self.assertLogs("src.stats", level="WARNING"):
            fit = fit_exponential_rate(points, floor=1e-10)
        self.assertEqual(fit.dropped, (20, 30))
        with self.assertLogs("src.stats", level="WARNING"):
            with self.assertRaises(ValueError):
                fit_exponential_rate(points, floor=1e-2)

    def test_negative_gap_with_floor(self):
        """Test that the semi-log fit refuses gaps below -floor."""
        points = [(T, 0.9 ** T) for T in range(10, 60, 10)] + [(60, -0.5)]
        with self.assertRaises(NonPositiveGap):
            fit_exponential_rate(points, floor=1e-10)


if __name__ == "__main__":
    unittest.main()
