"""
Unit tests for the schedules module.
"""

import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import (ConstraintViolated, DomainError, HorizonRequired, MissingConstant,
                        StepTooLarge)
from src.kinds import Rule
from src.schedules import (Schedule, analysis_sequences, c_delta_p, dump_schedule, eta,
                           eta_sequence, recommended_eta)


class TestEta(unittest.TestCase):
    """Test suite for the step-size formulas."""

    def test_convex_anytime_capped(self):
        """Test min(1/(2L), eta/sqrt(t)) with L = 1, eta = 1, t = 1."""
        self.assertEqual(eta(Schedule(Rule.CONVEX_ANYTIME, eta=1.0, L=1.0), 1), 0.5)

    def test_convex_anytime_decay(self):
        """Test the 1/sqrt(t) decay once the cap is inactive."""
        s = Schedule(Rule.CONVEX_ANYTIME, eta=1.0)
        self.assertAlmostEqual(eta(s, 4), 0.5)
        self.assertAlmostEqual(eta(s, 100), 0.1)

    def test_convex_fixed(self):
        """Test eta/sqrt(T) for every t."""
        s = Schedule(Rule.CONVEX_FIXED, eta=2.0, horizon=16)
        np.testing.assert_allclose(eta_sequence(s, 16), 0.5)

    def test_zamani(self):
        """Test eta (T - t + 1) / T^1.5 at T = 4."""
        s = Schedule(Rule.ZAMANI, eta=1.0, horizon=4)
        self.assertEqual(eta(s, 1), 0.5)
        self.assertEqual(eta(s, 4), 0.125)

    def test_heavy_anytime(self):
        """Test eta t^(-1/p) at p = 1.5, t = 4 with the cap disabled."""
        s = Schedule(Rule.HEAVY_ANYTIME, eta=1.0, p=1.5)
        self.assertAlmostEqual(eta(s, 4), 4.0 ** (-2.0 / 3.0))

    def test_heavy_anytime_cap(self):
        """Test that eta_star t^(-(2-p)/p) binds when it is smaller."""
        s = Schedule(Rule.HEAVY_ANYTIME, eta=10.0, eta_star=0.1, p=1.5)
        self.assertAlmostEqual(eta(s, 8), 0.1 * 8.0 ** (-1.0 / 3.0))

    def test_heavy_zamani_last_step(self):
        """Test that the heavy-tailed linear decay ends at eta T^(-(2p-1)/(p(p-1)))."""
        s = Schedule(Rule.HEAVY_ZAMANI, eta=1.0, p=1.5, horizon=10)
        self.assertAlmostEqual(eta(s, 10), 10.0 ** (-2.0 / 0.75))

    def test_strongly_convex_piecewise(self):
        """Test the four steps of the known-T piecewise rule at mu_f = 1, T = 4."""
        s = Schedule(Rule.STRC_F_KNOWN_PIECEWISE, eta=1.5, mu_f=1.0, horizon=4)
        np.testing.assert_allclose(eta_sequence(s, 4), [1.0, 2.0 / 3.0, 2.0 / 3.0, 0.5])

    def test_strongly_convex_h_anytime(self):
        """Test 2 / (mu_h (t + 4 kappa_h)) with L = 1, mu_h = 1."""
        s = Schedule(Rule.STRC_H_ANYTIME, L=1.0, mu_h=1.0)
        self.assertAlmostEqual(eta(s, 4), 0.25)

    def test_subweibull_rules_reuse_convex_steps(self):
        """Test that sub-Weibull rules produce the convex step sizes."""
        a = Schedule(Rule.SUBWEIBULL_ANYTIME, eta=0.7, L=0.3)
        b = Schedule(Rule.CONVEX_ANYTIME, eta=0.7, L=0.3)
        np.testing.assert_array_equal(eta_sequence(a, 50), eta_sequence(b, 50))

    def test_iterations_start_at_one(self):
        """Test that t = 0 is rejected."""
        with self.assertRaises(ValueError):
            eta(Schedule(Rule.CONSTANT), 0)

    def test_deterministic(self):
        """Test that two evaluations agree bit for bit."""
        s = Schedule(Rule.HEAVY_FIXED, eta=0.3, eta_star=2.0, L=1.0, p=1.3, horizon=200)
        np.testing.assert_array_equal(eta_sequence(s, 200), eta_sequence(s, 200))


class TestScheduleErrors(unittest.TestCase):
    """Test suite for the schedule preconditions."""

    def test_horizon_required(self):
        """Test that known-T rules without a horizon raise."""
        with self.assertRaises(HorizonRequired):
            eta(Schedule(Rule.ZAMANI), 1)

    def test_beyond_horizon(self):
        """Test that t > T is rejected."""
        with self.assertRaises(ValueError):
            eta(Schedule(Rule.CONVEX_FIXED, horizon=3), 4)

    def test_piecewise_constraint_f(self):
        """Test that eta + kappa_f <= 1 violates the piecewise precondition."""
        with self.assertRaises(ConstraintViolated):
            Schedule(Rule.STRC_F_KNOWN_PIECEWISE, eta=0.5, mu_f=1.0)

    def test_piecewise_constraint_h(self):
        """Test that eta = kappa_h = 0 violates the piecewise precondition."""
        with self.assertRaises(ConstraintViolated):
            Schedule(Rule.STRC_H_KNOWN_PIECEWISE, eta=0.0, mu_h=1.0)

    def test_missing_mu(self):
        """Test that strongly convex rules need their modulus."""
        with self.assertRaises(MissingConstant):
            Schedule(Rule.STRC_F_ANYTIME_1)
        with self.assertRaises(MissingConstant):
            Schedule(Rule.STRC_H_ANYTIME, mu_f=1.0)

    def test_missing_p(self):
        """Test that heavy-tailed rules need p in (1, 2)."""
        with self.assertRaises(MissingConstant):
            Schedule(Rule.HEAVY_ANYTIME)
        with self.assertRaises(MissingConstant):
            Schedule(Rule.HEAVY_ANYTIME, p=2.0)

    def test_step_too_large(self):
        """Test that a constant step above 1/(2L) is rejected."""
        with self.assertRaises(StepTooLarge):
            Schedule(Rule.CONSTANT, eta=1.0, L=1.0, horizon=5)

    def test_non_positive_eta(self):
        """Test that eta must be positive outside the piecewise rules."""
        with self.assertRaises(ValueError):
            Schedule(Rule.CONSTANT, eta=0.0)


class TestAnalysisSequences(unittest.TestCase):
    """Test suite for gamma_t, Gamma_t and v_t."""

    def test_constant(self):
        """Test v = (1/3, 1/3, 1/2, 1) for a constant step at T = 3."""
        seq = analysis_sequences(Schedule(Rule.CONSTANT, eta=1.0), 0.0, 0.0, 3)
        np.testing.assert_allclose(seq.gamma, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(seq.v, [1.0 / 3.0, 1.0 / 3.0, 0.5, 1.0])
        self.assertEqual(seq.T, 3)

    def test_strongly_convex_gamma(self):
        """Test gamma_t = 1 and Gamma_t = t for eta_t = 1/t with mu_f = 1."""
        s = Schedule(Rule.STRC_F_ANYTIME_1, mu_f=1.0)
        seq = analysis_sequences(s, 1.0, 0.0, 50)
        np.testing.assert_allclose(seq.gamma, 1.0, rtol=1e-12)
        np.testing.assert_allclose(seq.Gamma, np.arange(1, 51), rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=0.01, max_value=5.0), st.integers(min_value=1, max_value=200))
    def test_gamma_equals_eta_without_strong_convexity(self, base, T):
        """Test gamma_t = eta_t whenever mu_f = mu_h = 0."""
        s = Schedule(Rule.CONVEX_ANYTIME, eta=base)
        seq = analysis_sequences(s, 0.0, 0.0, T)
        np.testing.assert_allclose(seq.gamma, seq.eta, rtol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=0.01, max_value=5.0), st.integers(min_value=2, max_value=200))
    def test_tail_weights(self, base, T):
        """Test that v is non-decreasing, ends at 1 and v_0 = v_1 = gamma_T / sum gamma."""
        seq = analysis_sequences(Schedule(Rule.ZAMANI, eta=base, horizon=T), 0.0, 0.0, T)
        self.assertEqual(seq.v[-1], 1.0)
        self.assertEqual(seq.v[0], seq.v[1])
        self.assertTrue(np.all(np.diff(seq.v) >= -1e-15))
        self.assertAlmostEqual(seq.v[0], seq.gamma[-1] / np.sum(seq.gamma), places=12)

    def test_contraction_too_strong(self):
        """Test that mu_f eta_t >= 1 for t >= 2 is rejected."""
        with self.assertRaises(StepTooLarge):
            analysis_sequences(Schedule(Rule.CONSTANT, eta=1.0), 1.0, 0.0, 3)

    def test_long_strongly_convex_run_stays_finite_in_logs(self):
        """Test that log_gamma stays finite where gamma itself would overflow."""
        s = Schedule(Rule.STRC_H_KNOWN_PIECEWISE, eta=1.5, mu_h=1.0, horizon=10_000)
        seq = analysis_sequences(s, 0.0, 1.0, 10_000)
        self.assertTrue(np.all(np.isfinite(seq.log_gamma)))
        self.assertTrue(np.all(np.isfinite(seq.v)))


class TestConstants(unittest.TestCase):
    """Test suite for C(delta, p) and the recommended step sizes."""

    def test_c_delta_p_value(self):
        """Test C(0.5, 1) = (e ln(4e))^2 + 16 (6 ln 8 + ln^2 8)."""
        expected = (math.e * math.log(4.0 * math.e)) ** 2 + 16.0 * (
            6.0 * math.log(8.0) + math.log(8.0) ** 2)
        self.assertAlmostEqual(c_delta_p(0.5, 1.0), expected, places=9)
        self.assertAlmostEqual(c_delta_p(0.5, 1.0), 310.8876, places=3)

    def test_c_delta_p_small_p_value(self):
        """Test C(0.5, 1/2) = (4e)^4 + 64 ln^5(20760) / ln^4 2, about 2.6928e7."""
        # 4e > e ln(4e) picks the lead term; 4 (3 + 2 * 6^4) / 0.5 = 20760
        expected = 256.0 * math.exp(4.0) + 64.0 * math.log(20760.0) ** 5 / math.log(2.0) ** 4
        self.assertAlmostEqual(c_delta_p(0.5, 0.5) / expected, 1.0, places=12)
        self.assertAlmostEqual(c_delta_p(0.5, 0.5) / 1e7, 2.6928, delta=1e-3)

    def test_c_delta_p_monotone(self):
        """Test that C grows as delta shrinks."""
        for p in (0.5, 1.0, 1.5):
            values = [c_delta_p(delta, p) for delta in (0.5, 0.1, 0.01, 0.001)]
            self.assertEqual(values, sorted(values))

    def test_c_delta_p_domain(self):
        """Test that delta and p outside their ranges raise."""
        with self.assertRaises(DomainError):
            c_delta_p(0.0, 1.0)
        with self.assertRaises(DomainError):
            c_delta_p(0.5, 2.5)
        self.assertEqual(c_delta_p(0.5, 2.0), float("inf"))

    def test_convex_tuning(self):
        """Test eta = sqrt(D / (M^2 + sigma^2))."""
        self.assertEqual(recommended_eta(Rule.CONVEX_ANYTIME, 1.0, M=1.0), (1.0, float("inf")))

    def test_high_probability_tuning(self):
        """Test eta = sqrt(D / (sigma^2 ln(1/delta))) at delta = 1/e."""
        step, _ = recommended_eta(Rule.CONVEX_ANYTIME, 1.0, sigma=1.0, delta=math.exp(-1.0))
        self.assertAlmostEqual(step, 1.0)

    def test_fixed_horizon_divides_by_log(self):
        """Test that known-T tunings use D / ln T."""
        step, _ = recommended_eta(Rule.CONVEX_FIXED, math.e ** 2, M=1.0, T=int(math.e ** 4) + 1)
        self.assertAlmostEqual(step, math.sqrt(math.e ** 2 / math.log(int(math.e ** 4) + 1)))

    def test_heavy_tuning(self):
        """Test (D / (M^p + sigma^p))^(1/p) and an infinite cap when L = 0."""
        step, cap = recommended_eta(Rule.HEAVY_ANYTIME, 1.0, sigma=1.0, p=1.5)
        self.assertAlmostEqual(step, 1.0)
        self.assertEqual(cap, float("inf"))

    def test_missing_inputs(self):
        """Test that absent D, T or p raise MissingConstant."""
        with self.assertRaises(MissingConstant):
            recommended_eta(Rule.CONVEX_ANYTIME, None)
        with self.assertRaises(MissingConstant):
            recommended_eta(Rule.CONVEX_FIXED, 1.0)
        with self.assertRaises(MissingConstant):
            recommended_eta(Rule.HEAVY_ANYTIME, 1.0)


class TestDumpSchedule(unittest.TestCase):
    """Test suite for the schedule audit table."""

    def test_columns(self):
        """Test one row per t = 0..T with v_T = 1."""
        frame = dump_schedule(Schedule(Rule.CONSTANT, eta=0.5), 3)
        self.assertEqual(list(frame.columns), ["t", "eta", "gamma", "Gamma", "v"])
        self.assertEqual(len(frame), 4)
        self.assertEqual(frame["v"].iloc[-1], 1.0)
        self.assertTrue(math.isnan(frame["eta"].iloc[0]))


if __name__ == "__main__":
    unittest.main()
