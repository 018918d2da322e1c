# -*- coding: utf-8 -*-

"""Unit tests for generator parameters and dataset files."""

import json
import os
import tempfile
import unittest

import numpy as np

from bdhsic.errors import ConfigError, DataError
from bdhsic.q_marginal.sampling import ReferenceQ
from bdhsic.simgen.dataset import Dataset, Dependence, GenParams, \
    sidecar_path_for


class TestGenParams(unittest.TestCase):
    """Testing methods for GenParams."""

    def test_dependence_from_string(self):
        """Should accept dependence names."""
        self.assertIs(GenParams(dependence='cosine').dependence,
                      Dependence.COSINE)

    def test_invalid(self):
        """Should reject bad sizes, variances and dependences."""
        for values in ({'n': 0}, {'d_z': 0}, {'theta': 0.0}, {'phi': -1.0},
                       {'dependence': 'cubic'}):
            with self.assertRaises(ConfigError):
                GenParams(**values)

    def test_dict_round_trip(self):
        """Should rebuild parameters from their dict form."""
        params = GenParams(n=20, beta_xy=0.1, dependence='quadratic', seed=3)
        self.assertEqual(GenParams.from_dict(params.to_dict()), params)
        with self.assertRaises(ConfigError):
            GenParams.from_dict({'n': 10, 'gamma': 1.0})

    def test_replace(self):
        """Should change only the named fields."""
        params = GenParams(n=20).replace(seed=8)
        self.assertEqual((params.n, params.seed), (20, 8))


class TestDataset(unittest.TestCase):
    """Testing methods for Dataset."""

    def setUp(self):
        """Set a small dataset with weights."""
        rng = np.random.default_rng(0)
        self.dataset = Dataset(
            rng.normal(size=(6, 2)), rng.normal(size=6),
            rng.normal(size=(6, 3)), true_weights=rng.uniform(0.5, 2, 6),
            ground_truth_null=False, params=GenParams(n=6, d_x=2, d_z=3),
            reference_q=ReferenceQ.iid('gaussian', 2.0, 2),
            metadata={'acceptance_rate': 0.25})

    def test_columns(self):
        """Check the header names."""
        self.assertEqual(list(self.dataset.to_frame().columns),
                         ['x_1', 'x_2', 'y_1', 'z_1', 'z_2', 'z_3',
                          'w_true'])

    def test_validation(self):
        """Should reject misaligned rows and non-positive weights."""
        with self.assertRaises(DataError):
            Dataset(np.zeros((3, 1)), np.zeros(4), np.zeros(3))
        with self.assertRaises(DataError):
            Dataset(np.zeros(3), np.zeros(3), np.zeros(3),
                    true_weights=[1.0, 0.0, 1.0])

    def test_save_load(self):
        """Should read back rows, weights and sidecar."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'data.csv')
            sidecar = self.dataset.save(path)
            self.assertEqual(sidecar, os.path.join(directory, 'data.json'))
            with open(sidecar, encoding='utf-8') as handle:
                self.assertFalse(json.load(handle)['ground_truth_null'])
            loaded = Dataset.load(path)
        np.testing.assert_array_equal(loaded.x, self.dataset.x)
        np.testing.assert_array_equal(loaded.z, self.dataset.z)
        np.testing.assert_array_equal(loaded.true_weights,
                                      self.dataset.true_weights)
        self.assertEqual(loaded.params, self.dataset.params)
        self.assertEqual(loaded.reference_q, self.dataset.reference_q)
        self.assertFalse(loaded.ground_truth_null)

    def test_load_without_sidecar(self):
        """Should read a bare file with default kinds."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'bare.csv')
            self.dataset.to_frame().drop(columns='w_true').to_csv(
                path, index=False)
            loaded = Dataset.load(path)
        self.assertIsNone(loaded.true_weights)
        self.assertIsNone(loaded.ground_truth_null)
        self.assertEqual(loaded.x_kinds, ('continuous', 'continuous'))

    def test_missing_block(self):
        """Should reject a file without z columns."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'partial.csv')
            self.dataset.to_frame()[['x_1', 'y_1']].to_csv(path, index=False)
            with self.assertRaises(DataError):
                Dataset.load(path)

    def test_sidecar_path(self):
        """Check the sidecar name."""
        self.assertEqual(sidecar_path_for('out/run.csv'), 'out/run.json')


if __name__ == '__main__':
    unittest.main()
