"""
Unit tests for the engine module.

This module contains tests for the mirror descent loop, the z-diagnostics
and the bound evaluators.
"""

import math
import unittest
from unittest.mock import patch

import numpy as np

from src.errors import (DomainError, HistoryNotRetained, InfeasiblePoint, NonInteriorPoint,
                        NumericalDivergence)
from src.engine import (RunConfig, comparator_weights, expected_bound, hp_bound,
                        initial_distance, run_csmd, subweibull_hp_bound, z_diagnostics)
from src.kinds import NoiseGenerator, Rule
from src.noise import NoiseModel, RngStream
from src.problems import get_problem, make_linear, make_quadratic
from src.schedules import Schedule, analysis_sequences
from src.stats import standard_error


class TestRunCsmd(unittest.TestCase):
    """Test suite for run_csmd."""

    def setUp(self):
        """Create a noiseless model and a noisy one."""
        self.quiet = NoiseModel(NoiseGenerator.GAUSSIAN, 0.0)
        self.noisy = NoiseModel(NoiseGenerator.GAUSSIAN, 1.0)

    def test_two_gradient_steps(self):
        """Test x = 1 -> 0.5 -> 0.25 on 1/2 ||x||^2 with eta = 0.5."""
        problem = make_quadratic(np.ones(2), np.zeros(2))
        record = run_csmd(RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.5),
                                    np.array([1.0, 0.0]), 2, checkpoints=(1,)))
        self.assertEqual([c.t for c in record.checkpoints], [1, 2])
        self.assertEqual(record.checkpoints[0].gap, 0.125)
        self.assertEqual(record.gap_final, 0.03125)
        np.testing.assert_array_equal(record.final, [0.25, 0.0])

    def test_optimum_is_a_fixed_point(self):
        """Test that a noiseless run started at x* never moves."""
        problem = get_problem("quad_d3")
        record = run_csmd(RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.25),
                                    problem.x_star.copy(), 20, checkpoints=tuple(range(1, 21))))
        self.assertTrue(all(c.gap == 0.0 for c in record.checkpoints))

    def test_multiplicative_weights(self):
        """Test one entropic step on <(1, 0), x> from the uniform point."""
        problem = make_linear(np.array([1.0, 0.0]))
        record = run_csmd(RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=1.0),
                                    np.array([0.5, 0.5]), 1))
        e = math.e
        np.testing.assert_allclose(record.final, [1.0 / (1.0 + e), e / (1.0 + e)], rtol=1e-12)

    def test_noiseless_gaps_decrease(self):
        """Test monotone gaps of gradient descent with eta = 1/(2L)."""
        problem = get_problem("quad_d5")
        record = run_csmd(RunConfig(problem, self.quiet,
                                    Schedule(Rule.CONSTANT, eta=1.0 / (2.0 * problem.L)),
                                    problem.default_start, 30, checkpoints=tuple(range(1, 31))))
        gaps = [c.gap for c in record.checkpoints]
        self.assertTrue(all(b <= a for a, b in zip(gaps, gaps[1:])))

    def test_simplex_iterates_stay_feasible(self):
        """Test feasibility of noisy projected steps on the simplex."""
        problem = get_problem("quad_simplex_d4")
        record = run_csmd(RunConfig(problem, self.noisy, Schedule(Rule.CONSTANT, eta=0.5),
                                    problem.default_start, 50, rng=RngStream(3, 4)))
        self.assertTrue(problem.domain.contains(record.final))
        self.assertGreaterEqual(record.gap_final, -1e-12)

    def test_determinism(self):
        """Test that the same stream reproduces the run and another stream does not."""
        problem = get_problem("quad_l1_d5")
        schedule = Schedule(Rule.CONVEX_ANYTIME, eta=0.5, L=problem.L)

        def run(stream):
            return run_csmd(RunConfig(problem, self.noisy, schedule, problem.default_start, 40,
                                      checkpoints=(10, 20), rng=stream))

        self.assertEqual(run(RngStream(1, 7)), run(RngStream(1, 7)))
        self.assertNotEqual(run(RngStream(1, 7)), run(RngStream(1, 8)))

    def test_checkpoint_record(self):
        """Test the eta, distance and Bregman fields of a checkpoint."""
        problem = make_quadratic(np.ones(2), np.zeros(2))
        record = run_csmd(RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.5),
                                    np.array([1.0, 0.0]), 1))
        last = record.checkpoints[-1]
        self.assertEqual(last.eta, 0.5)
        self.assertEqual(last.distance, 0.5)
        self.assertEqual(last.bregman, 0.125)

    def test_divergence(self):
        """Test that a gap above 1e12 aborts the run."""
        problem = get_problem("abs_d1")
        config = RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=1e13),
                           np.zeros(1), 3)
        with self.assertRaises(NumericalDivergence):
            run_csmd(config)

    def test_prox_step_leaving_domain(self):
        """Test that an iterate outside the domain aborts the run."""
        problem = get_problem("quad_simplex_d3")
        config = RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.5),
                           problem.default_start, 3)
        with patch("src.engine.prox_solver", return_value=lambda g, x, eta: x + 1.0):
            with self.assertRaises(InfeasiblePoint):
                run_csmd(config)

    def test_horizon_must_be_positive(self):
        """Test that T = 0 is rejected while a single step is allowed."""
        problem = get_problem("quad_d2")
        with self.assertRaises(ValueError):
            RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.1),
                      problem.default_start, 0)
        config = RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.1),
                           problem.default_start, 1)
        self.assertEqual(config.checkpoints, (1,))

    def test_infeasible_start(self):
        """Test that a start outside the simplex is rejected."""
        problem = get_problem("quad_simplex_d2")
        with self.assertRaises(InfeasiblePoint):
            RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.5),
                      np.array([0.7, 0.7]), 5)

    def test_entropic_start_on_boundary(self):
        """Test that entropic runs refuse a vertex as start."""
        problem = make_linear(np.array([1.0, 0.0]))
        with self.assertRaises(NonInteriorPoint):
            RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT), np.array([1.0, 0.0]), 5)

    def test_checkpoints_in_range(self):
        """Test that checkpoints beyond T are rejected and T is always added."""
        problem = get_problem("quad_d2")
        with self.assertRaises(ValueError):
            RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.1),
                      problem.default_start, 5, checkpoints=(6,))
        config = RunConfig(problem, self.quiet, Schedule(Rule.CONSTANT, eta=0.1),
                           problem.default_start, 5, checkpoints=(3, 1, 3))
        self.assertEqual(config.checkpoints, (1, 3, 5))

    def test_initial_distance(self):
        """Test D_psi(x*, x^1) for the euclidean mirror."""
        problem = make_quadratic(np.ones(2), np.zeros(2))
        self.assertEqual(initial_distance(problem, np.array([1.0, 1.0])), 1.0)


class TestZDiagnostics(unittest.TestCase):
    """Test suite for the comparator points z^t."""

    def setUp(self):
        """Run three noiseless steps with the history kept."""
        self.problem = get_problem("quad_d3")
        self.schedule = Schedule(Rule.CONSTANT, eta=0.25)
        self.config = RunConfig(self.problem, NoiseModel(NoiseGenerator.GAUSSIAN, 0.5),
                                self.schedule, self.problem.default_start, 3,
                                record_z_diagnostics=True, rng=RngStream(0, 5))
        self.sequences = analysis_sequences(self.schedule, 0.0, 0.0, 3)

    def test_history_length(self):
        """Test that x^1 .. x^{T+1} are retained."""
        record = run_csmd(self.config)
        self.assertEqual(record.history.shape, (4, 3))
        np.testing.assert_array_equal(record.history[-1], record.final)

    def test_weights(self):
        """Test z^0 = x*, weights summing to one and the zero weight at t = 2."""
        record = run_csmd(self.config)
        rows = z_diagnostics(record, self.sequences, self.problem.x_star, self.problem)
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0].gap, 0.0)
        self.assertEqual(rows[0].min_weight, 1.0)
        self.assertEqual(rows[2].min_weight, 0.0)
        for row in rows:
            self.assertAlmostEqual(row.weight_sum, 1.0, places=12)
            self.assertGreaterEqual(row.min_weight, -1e-14)
            self.assertGreaterEqual(row.jensen_slack, -1e-10)

    def test_weight_vector(self):
        """Test the weights (2/3, 0, 1/3) of z^2 when gamma = 1 and T = 3."""
        sequences = analysis_sequences(Schedule(Rule.CONSTANT, eta=1.0), 0.0, 0.0, 3)
        np.testing.assert_allclose(sequences.v, [1 / 3, 1 / 3, 1 / 2, 1.0], rtol=1e-12)
        np.testing.assert_allclose(comparator_weights(sequences.v, 2), [2 / 3, 0.0, 1 / 3],
                                   rtol=1e-12, atol=1e-15)
        np.testing.assert_array_equal(comparator_weights(sequences.v, 0), [1.0])
        with self.assertRaises(ValueError):
            comparator_weights(sequences.v, 4)

    def test_z_point_matches_weights(self):
        """Test that z^2 is the weighted combination of x*, x^1 and x^2."""
        record = run_csmd(self.config)
        rows = z_diagnostics(record, self.sequences, self.problem.x_star, self.problem)
        w = comparator_weights(self.sequences.v, 2)
        z = w[0] * self.problem.x_star + w[1] * record.history[0] + w[2] * record.history[1]
        self.assertAlmostEqual(rows[2].gap, self.problem.value(z) - self.problem.F_star,
                               places=12)

    def test_history_required(self):
        """Test that a run without history cannot produce z-diagnostics."""
        config = RunConfig(self.problem, NoiseModel(NoiseGenerator.GAUSSIAN, 0.0),
                           self.schedule, self.problem.default_start, 3)
        with self.assertRaises(HistoryNotRetained):
            z_diagnostics(run_csmd(config), self.sequences, self.problem.x_star, self.problem)


class TestBounds(unittest.TestCase):
    """Test suite for the bound evaluators."""

    def setUp(self):
        """Build gamma = eta = 1 over T = 2."""
        self.sequences = analysis_sequences(Schedule(Rule.CONSTANT, eta=1.0), 0.0, 0.0, 2)

    def test_expected_bound(self):
        """Test D/2 + 2 M^2 (1/2 + 1) = 3.5."""
        self.assertAlmostEqual(expected_bound(self.sequences, 1.0, 1.0, 0.0, 0.0), 3.5)

    def test_expected_bound_strongly_convex(self):
        """Test mu_f = 1, eta_t = 1/t, T = 10: the distance term vanishes."""
        schedule = Schedule(Rule.STRC_F_ANYTIME_1, mu_f=1.0)
        sequences = analysis_sequences(schedule, 1.0, 0.0, 10)
        steps = [1.0 / t for t in range(1, 11)]
        noise_sum = sum((1.0 / t) / (10 - t + 1) for t in range(1, 11))
        value = expected_bound(sequences, 1.0, 1.0, 1.0, 1.0, eta=steps)
        self.assertAlmostEqual(value, 2.0 * 2.0 * noise_sum, places=12)
        self.assertAlmostEqual(expected_bound(sequences, 1.0, 0.0, 0.0, 1.0), 0.0, places=12)

    def test_expected_bound_checks_steps(self):
        """Test that mismatched step sizes are rejected."""
        with self.assertRaises(ValueError):
            expected_bound(self.sequences, 1.0, 1.0, 0.0, 0.0, eta=[1.0, 0.5])

    def test_hp_bound(self):
        """Test 4 [1/2 + (2 + 2 ln 4) 3/2] at delta = 1/2."""
        expected = 4.0 * (0.5 + (2.0 + 2.0 * math.log(4.0)) * 1.5)
        self.assertAlmostEqual(hp_bound(self.sequences, 1.0, 1.0, 1.0, 0.0, None, 0.5),
                               expected)

    def test_hp_bound_domain(self):
        """Test that delta outside (0, 1) raises."""
        with self.assertRaises(DomainError):
            hp_bound(self.sequences, 1.0, 1.0, 1.0, 0.0, None, 2.0)

    def test_hp_bound_grows_as_delta_shrinks(self):
        """Test monotonicity in the failure probability."""
        values = [hp_bound(self.sequences, 1.0, 0.0, 1.0, 0.0, None, d) for d in (0.5, 0.1, 0.01)]
        self.assertEqual(values, sorted(values))

    def test_subweibull_bound_noiseless(self):
        """Test that sigma = 0 gives a finite bound."""
        value = subweibull_hp_bound(self.sequences, 1.0, 1.0, 0.0, 0.0, 0.1, 1.0)
        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value, 2.0 * (0.5 + 2.0 * 1.5))


class TestExpectedBoundUnderNoise(unittest.TestCase):
    """Test suite comparing noisy runs with the expectation bound."""

    REPLICATIONS = 200
    T = 20

    def setUp(self):
        """Use bounded-variance Gaussian noise."""
        self.noise = NoiseModel(NoiseGenerator.GAUSSIAN, 1.0)

    def _gaps(self, problem, schedule):
        checkpoints = tuple(range(1, self.T + 1))
        rows = []
        for r in range(self.REPLICATIONS):
            record = run_csmd(RunConfig(problem, self.noise, schedule, problem.default_start,
                                        self.T, checkpoints, rng=RngStream.derive(0, 3, r)))
            rows.append([c.gap for c in record.checkpoints])
        return np.array(rows)

    def test_mean_below_bound_at_every_checkpoint(self):
        """Test mean - 2 se <= expected_bound for every t, smooth and strongly convex."""
        smooth = get_problem("quad_d5")
        strong = get_problem("quad_ball_lipschitz_d3")
        cases = [
            (smooth, Schedule(Rule.CONSTANT, eta=0.1, L=smooth.L)),
            (strong, Schedule(Rule.STRC_F_ANYTIME_1, L=strong.L, mu_f=strong.mu_f)),
        ]
        for problem, schedule in cases:
            with self.subTest(problem=problem.name):
                gaps = self._gaps(problem, schedule)
                D = initial_distance(problem, problem.default_start)
                for t in range(1, self.T + 1):
                    sequences = analysis_sequences(schedule, problem.mu_f, problem.mu_h, t)
                    bound = expected_bound(sequences, D, problem.M, self.noise.sigma,
                                           problem.mu_f)
                    column = gaps[:, t - 1]
                    self.assertLessEqual(float(np.mean(column)) - 2.0 * standard_error(column),
                                         bound, msg=f"t={t}")


if __name__ == "__main__":
    unittest.main()
