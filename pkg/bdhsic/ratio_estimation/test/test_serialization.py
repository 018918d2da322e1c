# -*- coding: utf-8 -*-

"""Unit tests for model documents."""

import json
import os
import tempfile
import unittest

import numpy as np

from bdhsic.errors import ConfigError
from bdhsic.ratio_estimation.categorical import train_categorical
from bdhsic.ratio_estimation.mixed import train_mixed
from bdhsic.ratio_estimation.models import UniformBaselineModel, \
    UnitWeightModel, predict_weights
from bdhsic.ratio_estimation.nce import BridgeSchedule, train_nce_q, \
    train_tre_q
from bdhsic.ratio_estimation.scorer import ScorerSpec
from bdhsic.ratio_estimation.serialization import from_document, \
    load_model, save_model, to_document


class TestDocuments(unittest.TestCase):
    """Testing methods for to_document and from_document."""

    @classmethod
    def setUpClass(cls):
        """Set one trained model of every kind."""
        rng = np.random.default_rng(0)
        n = 300
        cls.z = rng.normal(size=(n, 2))
        cls.x = rng.normal(size=(n, 1)) + 0.5 * cls.z[:, :1]
        cls.x_cat = rng.integers(0, 3, size=(n, 1)).astype(float)
        spec = ScorerSpec(hidden_layers=(4,), max_epochs=3)
        x_q = rng.normal(size=(n, 1))
        cls.models = {
            'nce': (train_nce_q((cls.x, cls.z), (x_q, cls.z), spec),
                    cls.x),
            'tre': (train_tre_q((cls.x, cls.z), (x_q, cls.z),
                                BridgeSchedule.linear(2), spec), cls.x),
            'categorical': (train_categorical(cls.x_cat, cls.z, spec),
                            cls.x_cat),
            'mixed': (train_mixed(cls.x_cat, cls.x, cls.z, spec),
                      np.hstack([cls.x_cat, cls.x])),
            'uniform': (UniformBaselineModel(seed=3), cls.x),
            'unit': (UnitWeightModel(), cls.x),
        }

    def test_round_trip(self):
        """Should predict identically after a JSON round trip."""
        for name, (model, x) in self.models.items():
            with self.subTest(model=name):
                document = json.loads(json.dumps(to_document(model)))
                rebuilt = from_document(document)
                self.assertIs(rebuilt.kind, model.kind)
                np.testing.assert_array_equal(
                    predict_weights(rebuilt, x, self.z),
                    predict_weights(model, x, self.z))

    def test_schedule_kept(self):
        """Should keep the TRE-q bridge schedule."""
        model, _ = self.models['tre']
        rebuilt = from_document(to_document(model))
        self.assertEqual(rebuilt.schedule, model.schedule)

    def test_files(self):
        """Should save and load a model file."""
        model, x = self.models['nce']
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'model.json')
            save_model(model, path)
            loaded = load_model(path)
        np.testing.assert_array_equal(predict_weights(loaded, x, self.z),
                                      predict_weights(model, x, self.z))

    def test_invalid(self):
        """Should reject unknown formats and kinds."""
        with self.assertRaises(ConfigError):
            from_document({'format': 99, 'kind': 'nce_q'})
        with self.assertRaises(ConfigError):
            from_document({'format': 1, 'kind': 'flow'})


if __name__ == '__main__':
    unittest.main()
