# -*- coding: utf-8 -*-

"""Unit tests for the HSIC estimators."""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import numpy as np

from bdhsic.errors import DimensionError, DomainError, NonFiniteError
from bdhsic.kernels.gram import KernelSpec, gram
from bdhsic.statistic.hsic import StatisticInputs, TestResult, \
    bd_hsic_statistic, ess, hsic_biased


def brute_force_statistic(K, L, Kq, KQ, w):
    """Term-by-term loops over the weighted statistic."""
    n, m = Kq.shape
    first = 0.0
    for i in range(n):
        for j in range(n):
            first += w[i] * w[j] * K[i, j] * L[i, j]
    kq_total = 0.0
    for a in range(m):
        for b in range(m):
            kq_total += KQ[a, b]
    weighted_l = 0.0
    for i in range(n):
        for j in range(n):
            weighted_l += w[i] * w[j] * L[i, j]
    third = 0.0
    for i in range(n):
        for a in range(m):
            for j in range(n):
                third += w[i] * Kq[i, a] * L[i, j] * w[j]
    return (first / n ** 2 + kq_total * weighted_l / (m ** 2 * n ** 2)
            - 2.0 * third / (n ** 2 * m))


def random_psd(rng, size):
    """Random RBF Gram matrix on Gaussian points."""
    points = rng.normal(size=(size, 2))
    return gram(points, points, KernelSpec('rbf', 1.0)).entries


class TestHsicBiased(unittest.TestCase):
    """Testing methods for the biased HSIC estimator."""

    def test_constant_kernels(self):
        """Should vanish for all-ones kernels."""
        ones = np.ones((5, 5))
        self.assertAlmostEqual(hsic_biased(ones, ones), 0.0, places=14)

    def test_single_sample(self):
        """Should vanish for n = 1."""
        self.assertEqual(hsic_biased([[0.7]], [[0.3]]), 0.0)

    def test_two_by_two(self):
        """Check the hand-evaluated three-term sum for a=0.5, b=0.25."""
        K = np.array([[1.0, 0.5], [0.5, 1.0]])
        L = np.array([[1.0, 0.25], [0.25, 1.0]])
        # 2.25/4 + 3*2.5/16 - 2*3.75/8
        self.assertAlmostEqual(hsic_biased(K, L), 0.09375, places=14)

    def test_dimension_mismatch(self):
        """Should reject matrices of different size."""
        with self.assertRaises(DimensionError):
            hsic_biased(np.eye(3), np.eye(2))


class TestBdHsicStatistic(unittest.TestCase):
    """Testing methods for the weighted statistic."""

    def test_reduces_to_hsic(self):
        """Check unit weights and x^q = x give the biased estimator."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 201))
            K = random_psd(rng, n)
            L = random_psd(rng, n)
            inputs = StatisticInputs(K, L, K, K, np.ones(n))
            expected = hsic_biased(K, L)
            self.assertLessEqual(
                abs(bd_hsic_statistic(inputs) - expected),
                1e-10 * max(1.0, abs(expected)))

    def test_brute_force_oracle(self):
        """Check the matrix expression against triple loops for n <= 6."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            m = int(rng.integers(1, 7))
            K = random_psd(rng, n)
            L = random_psd(rng, n)
            KQ = random_psd(rng, m)
            Kq = rng.uniform(0.0, 1.0, size=(n, m))
            w = rng.uniform(0.0, 3.0, size=n)
            inputs = StatisticInputs(K, L, Kq, KQ, w)
            self.assertAlmostEqual(bd_hsic_statistic(inputs),
                                   brute_force_statistic(K, L, Kq, KQ, w),
                                   delta=1e-10)

    def test_two_sample_instance(self):
        """Check a fixed n=2 instance with weights (1, 2)."""
        K = np.array([[1.0, 0.3], [0.3, 1.0]])
        L = np.array([[1.0, 0.6], [0.6, 1.0]])
        Kq = np.array([[0.9, 0.2], [0.4, 0.7]])
        KQ = np.array([[1.0, 0.1], [0.1, 1.0]])
        w = np.array([1.0, 2.0])
        inputs = StatisticInputs(K, L, Kq, KQ, w)
        self.assertAlmostEqual(bd_hsic_statistic(inputs),
                               brute_force_statistic(K, L, Kq, KQ, w),
                               places=12)

    def test_zero_weights(self):
        """Should vanish when every weight is zero."""
        rng = np.random.default_rng(2)
        K = random_psd(rng, 6)
        inputs = StatisticInputs(K, random_psd(rng, 6), K, K, np.zeros(6))
        self.assertEqual(bd_hsic_statistic(inputs), 0.0)

    def test_weight_scaling(self):
        """Check that scaling the weights by lambda scales by lambda^2."""
        rng = np.random.default_rng(3)
        K, L = random_psd(rng, 8), random_psd(rng, 8)
        w = rng.uniform(0.1, 2.0, size=8)
        base = bd_hsic_statistic(StatisticInputs(K, L, K, K, w))
        scaled = bd_hsic_statistic(StatisticInputs(K, L, K, K, 3.0 * w))
        self.assertAlmostEqual(scaled, 9.0 * base, delta=1e-12)

    def test_invalid_inputs(self):
        """Should reject inconsistent shapes and bad weights."""
        K = np.eye(3)
        with self.assertRaises(DimensionError):
            StatisticInputs(K, np.eye(2), K, K, np.ones(3))
        with self.assertRaises(DimensionError):
            StatisticInputs(K, K, np.ones((3, 2)), K, np.ones(3))
        with self.assertRaises(NonFiniteError):
            StatisticInputs(K, K, K, K, [1.0, np.inf, 1.0])
        with self.assertRaises(DomainError):
            StatisticInputs(K, K, K, K, [1.0, -1.0, 1.0])

    def test_result_record(self):
        """Should serialise a TestResult to plain types."""
        result = TestResult(0.5, np.array([0.1, 0.2]), 0.4, 2.0, 10)
        record = result.to_record()
        self.assertEqual(record['null_sample'], [0.1, 0.2])
        self.assertEqual(record['n_test'], 10)


class TestEss(unittest.TestCase):
    """Testing methods for the effective sample size."""

    def test_equal_weights(self):
        """Should equal n for constant weights."""
        self.assertAlmostEqual(ess(np.full(17, 0.3)), 17.0, places=10)

    def test_single_mass(self):
        """Should equal 1 for a single non-zero weight."""
        self.assertEqual(ess([1.0, 0.0, 0.0, 0.0]), 1.0)

    def test_two_weights(self):
        """Check (1 + 2)^2 / (1 + 4) = 1.8."""
        self.assertAlmostEqual(ess([1.0, 2.0]), 1.8, places=14)

    def test_all_zero(self):
        """Should reject all-zero weights."""
        with self.assertRaises(DomainError):
            ess(np.zeros(4))

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(1, 50),
                  elements=st.floats(0.001, 1e3)))
    def test_bounds(self, weights):
        """Check 1 <= ESS <= n."""
        value = ess(weights)
        self.assertGreaterEqual(value, 1.0 - 1e-12)
        self.assertLessEqual(value, len(weights) * (1.0 + 1e-12))


if __name__ == '__main__':
    unittest.main()
