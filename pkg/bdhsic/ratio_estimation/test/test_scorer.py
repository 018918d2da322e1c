# -*- coding: utf-8 -*-

"""Unit tests for the scorer network, its loss and its trainer."""

import math
import unittest

import numpy as np

from bdhsic.errors import ConfigError, DataError, EstimatorError
from bdhsic.ratio_estimation.scorer import Scorer, ScorerSpec, \
    ScorerTrainer, evaluate_loss, nce_loss, scorer_gradient_check


class TestScorerSpec(unittest.TestCase):
    """Testing methods for ScorerSpec validation."""

    def test_defaults(self):
        """Check the default architecture."""
        spec = ScorerSpec()
        self.assertEqual(spec.hidden_layers, (32, 32))
        self.assertEqual(spec.activation, 'tanh')
        self.assertEqual(spec.nu, 1.0)
        self.assertEqual((spec.learning_rate, spec.batch_size), (0.05, 64))
        self.assertEqual((spec.max_epochs, spec.patience), (300, 15))

    def test_invalid(self):
        """Should reject widths, rates, patience and nu out of range."""
        for values in ({'hidden_layers': (0,)}, {'learning_rate': 0.0},
                       {'patience': 0}, {'nu': -1.0},
                       {'activation': 'sigmoid'},
                       {'validation_fraction': 1.0}):
            with self.assertRaises(ConfigError):
                ScorerSpec(**values)

    def test_with_seed(self):
        """Should only change the seed."""
        spec = ScorerSpec(hidden_layers=(4,), seed=1).with_seed(7)
        self.assertEqual(spec.seed, 7)
        self.assertEqual(spec.hidden_layers, (4,))


class TestLoss(unittest.TestCase):
    """Testing methods for the noise contrastive loss."""

    def test_unit_ratio(self):
        """Check that r = 1 and nu = 1 give 2 ln 2."""
        loss, _, _ = nce_loss(np.zeros(10), np.zeros(10), 1.0)
        self.assertAlmostEqual(loss, 2 * math.log(2), places=12)

    def test_separated(self):
        """Should approach 0 for confident correct scores."""
        loss, _, _ = nce_loss(np.full(5, 40.0), np.full(5, -40.0))
        self.assertLess(loss, 1e-15)


class TestScorer(unittest.TestCase):
    """Testing methods for the scorer network."""

    def setUp(self):
        """Set a small scorer."""
        self.scorer = Scorer.initialise(3, ScorerSpec(hidden_layers=(5, 4)))

    def test_flat_parameters(self):
        """Should restore a network from its flat parameter vector."""
        flat = self.scorer.flat_parameters()
        self.assertEqual(flat.size, 3 * 5 + 5 + 5 * 4 + 4 + 4 + 1)
        other = Scorer.initialise(3, ScorerSpec(hidden_layers=(5, 4),
                                                seed=9))
        other.set_flat_parameters(flat)
        inputs = np.random.default_rng(0).normal(size=(6, 3))
        np.testing.assert_array_equal(other.score(inputs),
                                      self.scorer.score(inputs))

    def test_wrong_length(self):
        """Should reject a parameter vector of the wrong length."""
        with self.assertRaises(ConfigError):
            self.scorer.set_flat_parameters(np.zeros(3))
        too_long = np.append(self.scorer.flat_parameters(), 0.0)
        with self.assertRaises(ConfigError):
            self.scorer.set_flat_parameters(too_long)

    def test_dict_round_trip(self):
        """Should score identically after a dict round trip."""
        inputs = np.random.default_rng(1).normal(size=(6, 3))
        rebuilt = Scorer.from_dict(self.scorer.to_dict())
        np.testing.assert_array_equal(rebuilt.score(inputs),
                                      self.scorer.score(inputs))


class TestGradientCheck(unittest.TestCase):
    """Testing methods for scorer_gradient_check."""

    def test_linear(self):
        """Check a linear scorer to 1e-6."""
        self.assertLessEqual(
            scorer_gradient_check(ScorerSpec(hidden_layers=())), 1e-6)

    def test_one_tanh_layer(self):
        """Check one tanh layer of width 8 to 1e-4."""
        self.assertLessEqual(
            scorer_gradient_check(ScorerSpec(hidden_layers=(8,))), 1e-4)

    def test_default(self):
        """Check the default architecture to 1e-4."""
        self.assertLessEqual(scorer_gradient_check(ScorerSpec()), 1e-4)

    def test_unperturbed_loss(self):
        """Check the loss is unchanged after restoring the parameters."""
        spec = ScorerSpec(hidden_layers=(4,))
        rng = np.random.default_rng(2)
        numerator, denominator = rng.normal(size=(5, 2)), \
            rng.normal(size=(5, 2))
        scorer = Scorer.initialise(2, spec)
        baseline = evaluate_loss(scorer, numerator, denominator)
        scorer.set_flat_parameters(scorer.flat_parameters())
        self.assertEqual(evaluate_loss(scorer, numerator, denominator),
                         baseline)

    def test_small_probe(self):
        """Should reject a probe with fewer than four points."""
        with self.assertRaises(DataError):
            scorer_gradient_check(ScorerSpec(),
                                  probe=(np.zeros((1, 2)), np.ones((2, 2))))


class TestTrainer(unittest.TestCase):
    """Testing methods for ScorerTrainer."""

    def test_separable(self):
        """Should drive the validation loss towards 0 on separable data."""
        rng = np.random.default_rng(3)
        numerator = rng.normal(5.0, 0.1, size=(200, 1))
        denominator = rng.normal(-5.0, 0.1, size=(200, 1))
        spec = ScorerSpec(hidden_layers=(), learning_rate=0.5,
                          max_epochs=200, batch_size=512)
        _, report = ScorerTrainer(spec).fit(numerator, denominator)
        self.assertLess(report.validation_losses[-1], 0.1)
        self.assertLess(report.validation_losses[-1],
                        report.validation_losses[0])

    def test_best_snapshot(self):
        """Check the running best and the best-validation snapshot."""
        rng = np.random.default_rng(4)
        numerator = rng.normal(0.5, 1.0, size=(300, 2))
        denominator = rng.normal(0.0, 1.0, size=(300, 2))
        spec = ScorerSpec(hidden_layers=(4,), learning_rate=0.05,
                          max_epochs=30)
        _, report = ScorerTrainer(spec).fit(numerator, denominator)
        running = report.running_best_train_losses()
        self.assertTrue(all(b <= a for a, b in zip(running, running[1:])))
        self.assertEqual(report.best_validation_loss,
                         min(report.validation_losses))

    def test_early_stopping(self):
        """Should stop early when the classes cannot be told apart."""
        rng = np.random.default_rng(5)
        spec = ScorerSpec(hidden_layers=(), learning_rate=0.1,
                          max_epochs=2000, patience=5, min_delta=1e-4)
        _, report = ScorerTrainer(spec).fit(rng.normal(size=(400, 2)),
                                            rng.normal(size=(400, 2)))
        self.assertTrue(report.converged)
        self.assertLess(len(report.validation_losses), 2000)

    def test_deterministic(self):
        """Should return identical parameters for the same seed."""
        rng = np.random.default_rng(6)
        numerator, denominator = rng.normal(size=(100, 2)), \
            rng.normal(1.0, 1.0, size=(100, 2))
        spec = ScorerSpec(hidden_layers=(4,), max_epochs=5)
        first, _ = ScorerTrainer(spec).fit(numerator, denominator)
        second, _ = ScorerTrainer(spec).fit(numerator, denominator)
        np.testing.assert_array_equal(first.flat_parameters(),
                                      second.flat_parameters())

    def test_degenerate(self):
        """Should refuse identical training inputs."""
        with self.assertRaises(EstimatorError):
            ScorerTrainer(ScorerSpec(max_epochs=2)).fit(np.ones((20, 2)),
                                                        np.ones((20, 2)))

    def test_width_mismatch(self):
        """Should refuse classes of different widths."""
        with self.assertRaises(DataError):
            ScorerTrainer(ScorerSpec()).fit(np.zeros((10, 2)),
                                            np.zeros((10, 3)))


if __name__ == '__main__':
    unittest.main()
