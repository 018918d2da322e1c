# -*- coding: utf-8 -*-

"""Unit tests for q-sample generation."""

import unittest

import numpy as np

from bdhsic.errors import ConfigError, DimensionError
from bdhsic.q_marginal.sampling import QMode, QSpec, ReferenceQ, sample_q


class TestQSpec(unittest.TestCase):
    """Testing methods for QSpec validation."""

    def test_mode_from_string(self):
        """Should accept mode names."""
        self.assertIs(QSpec('scale', c_q=0.5).mode, QMode.SCALE)

    def test_invalid(self):
        """Should reject bad scalings, modes and missing references."""
        with self.assertRaises(ConfigError):
            QSpec('scale', c_q=0.0)
        with self.assertRaises(ConfigError):
            QSpec('shrink')
        with self.assertRaises(ConfigError):
            QSpec('reference')
        with self.assertRaises(ConfigError):
            ReferenceQ((('cauchy', 1.0),))


class TestSampleQ(unittest.TestCase):
    """Testing methods for sample_q."""

    def test_identity_rows(self):
        """Should copy X for c_q = 1 and identity rows."""
        x = np.arange(12.0).reshape(6, 2)
        draws = sample_q(x, QSpec('scale', c_q=1.0), rows=np.arange(6))
        np.testing.assert_array_equal(draws, x)
        self.assertIsNot(draws, x)

    def test_identity_mode(self):
        """Should return X row for row in identity mode."""
        x = np.random.default_rng(3).normal(size=(7, 2))
        draws = sample_q(x, QSpec('identity', seed=5))
        np.testing.assert_array_equal(draws, x)
        self.assertIsNot(draws, x)

    def test_scaled_row(self):
        """Check (2, 4) scaled by 0.5 gives (1, 2)."""
        draws = sample_q([[2.0, 4.0]], QSpec('scale', c_q=0.5), rows=[0])
        np.testing.assert_array_equal(draws, [[1.0, 2.0]])

    def test_scaled_variance(self):
        """Check var(x^q) = c_q^2 var(X) within 5% at n = 1e5."""
        x = np.random.default_rng(0).normal(size=(100000, 1))
        draws = sample_q(x, QSpec('scale', c_q=0.7, seed=1))
        self.assertAlmostEqual(draws.var() / (0.49 * x.var()), 1.0,
                               delta=0.05)

    def test_rows_from_observed(self):
        """Check resampled rows all come from X."""
        x = np.random.default_rng(1).normal(size=(50, 3))
        draws = sample_q(x, QSpec('resample', seed=2))
        observed = {tuple(row) for row in x}
        self.assertTrue(all(tuple(row) in observed for row in draws))

    def test_deterministic(self):
        """Should give identical draws for the same seed."""
        x = np.random.default_rng(2).normal(size=(40, 2))
        spec = QSpec('scale', c_q=0.8, seed=9)
        np.testing.assert_array_equal(sample_q(x, spec), sample_q(x, spec))

    def test_reference(self):
        """Should draw from the reference distribution."""
        reference = ReferenceQ((('gaussian', 2.0), ('bernoulli', 0.5)))
        draws = sample_q(np.zeros((20000, 2)),
                         QSpec('reference', seed=3, reference=reference))
        self.assertAlmostEqual(draws[:, 0].std(), 2.0, delta=0.05)
        self.assertTrue(set(np.unique(draws[:, 1])) <= {0.0, 1.0})
        self.assertAlmostEqual(draws[:, 1].mean(), 0.5, delta=0.02)

    def test_reference_round_trip(self):
        """Should rebuild a reference from its dict form."""
        reference = ReferenceQ.iid('exponential', 0.15, 2)
        self.assertEqual(ReferenceQ.from_dict(reference.to_dict()),
                         reference)

    def test_errors(self):
        """Should reject empty X and mismatched references."""
        with self.assertRaises(DimensionError):
            sample_q(np.zeros((0, 2)), QSpec())
        reference = ReferenceQ.iid('gaussian', 1.0, 3)
        with self.assertRaises(DimensionError):
            sample_q(np.zeros((5, 2)),
                     QSpec('reference', reference=reference))


if __name__ == '__main__':
    unittest.main()
