# -*- coding: utf-8 -*-

"""Unit tests for the categorical ratio estimator."""

import unittest

import numpy as np

from scipy.special import expit

from bdhsic.errors import DataError, DimensionError
from bdhsic.ratio_estimation.categorical import ConditionalClassifier, \
    EmpiricalMarginal, encode_categories, train_categorical
from bdhsic.ratio_estimation.models import ModelKind, predict_weights
from bdhsic.ratio_estimation.scorer import ScorerSpec


class TestTables(unittest.TestCase):
    """Testing methods for the smoothed frequency table and classifier."""

    def test_encode(self):
        """Should code joint categories row by row."""
        categories, codes = encode_categories([[1, 0], [0, 1], [1, 0]])
        self.assertEqual(categories, ((0.0, 1.0), (1.0, 0.0)))
        np.testing.assert_array_equal(codes, [1, 0, 1])

    def test_laplace(self):
        """Check (count + 1) / (n + K + 1), and 1 / (n + K + 1) if unseen."""
        marginal = EmpiricalMarginal.fit(np.array([[0], [0], [1]]))
        np.testing.assert_allclose(
            marginal.probabilities(np.array([[0.0], [1.0], [2.0]])),
            [3 / 6, 2 / 6, 1 / 6])

    def test_softmax_rows(self):
        """Should give class probabilities summing to one."""
        rng = np.random.default_rng(0)
        z = rng.normal(size=(300, 2))
        x = rng.integers(0, 3, size=(300, 1))
        classifier = ConditionalClassifier.fit(x, z)
        probabilities = classifier.class_probabilities(z[:10])
        self.assertEqual(probabilities.shape, (10, 3))
        np.testing.assert_allclose(probabilities.sum(axis=1), 1.0)


class TestTrainCategorical(unittest.TestCase):
    """Testing methods for train_categorical."""

    def test_constant(self):
        """Should give weights of exactly 1 for constant X."""
        z = np.random.default_rng(1).normal(size=(50, 2))
        model = train_categorical(np.ones((50, 1)), z, ScorerSpec())
        np.testing.assert_array_equal(
            predict_weights(model, np.ones((50, 1)), z), np.ones(50))

    def test_independent(self):
        """Check the mean weight for binary X independent of Z."""
        rng = np.random.default_rng(2)
        z = rng.normal(size=(5000, 1))
        x = rng.integers(0, 2, size=(5000, 1))
        weights = predict_weights(train_categorical(x, z, ScorerSpec()),
                                  x, z)
        self.assertTrue(0.9 <= weights.mean() <= 1.1)

    def test_confounded(self):
        """Check weights against p(x) / p(x | z) for a logistic treatment."""
        rng = np.random.default_rng(3)
        z = rng.normal(size=(5000, 1))
        propensity = expit(1.5 * z[:, 0])
        x = (rng.uniform(size=5000) < propensity).astype(float)[:, None]
        weights = predict_weights(train_categorical(x, z, ScorerSpec()),
                                  x, z)
        marginal = np.where(x[:, 0] == 1, propensity.mean(),
                            1 - propensity.mean())
        conditional = np.where(x[:, 0] == 1, propensity, 1 - propensity)
        truth = marginal / conditional
        self.assertLess(np.median(np.abs(weights / truth - 1)), 0.1)
        self.assertTrue(0.8 <= weights.mean() <= 1.2)

    def test_factorized(self):
        """Should switch to one factor per column from eight columns."""
        rng = np.random.default_rng(4)
        z = rng.normal(size=(400, 2))
        x = rng.integers(0, 2, size=(400, 8))
        model = train_categorical(x, z, ScorerSpec())
        self.assertTrue(model.factorized)
        self.assertIs(model.kind, ModelKind.CATEGORICAL_FACTORIZED)
        self.assertEqual(len(model.factors), 8)
        small = train_categorical(x[:, :7], z, ScorerSpec())
        self.assertIs(small.kind, ModelKind.CATEGORICAL)

    def test_unseen_category(self):
        """Should give weight 1 to a category unseen in training."""
        rng = np.random.default_rng(5)
        z = rng.normal(size=(200, 1))
        x = rng.integers(0, 2, size=(200, 1))
        model = train_categorical(x, z, ScorerSpec())
        weights = predict_weights(model, np.array([[7.0]]), z[:1])
        self.assertAlmostEqual(weights[0], 1.0, places=12)

    def test_errors(self):
        """Should reject empty input and mismatched dimensions."""
        with self.assertRaises(DataError):
            train_categorical(np.zeros((0, 1)), np.zeros((0, 1)),
                              ScorerSpec())
        model = train_categorical(np.ones((10, 1)), np.zeros((10, 1)),
                                  ScorerSpec())
        with self.assertRaises(DimensionError):
            predict_weights(model, np.ones((10, 2)), np.zeros((10, 1)))


if __name__ == '__main__':
    unittest.main()
