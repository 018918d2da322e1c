# -*- coding: utf-8 -*-
"""Importance weights for categorical treatments.

The weight of a row is p(x) / p(x | z). The marginal is a Laplace-smoothed
frequency table, the conditional a multinomial logistic classifier of the
treatment category given the confounders, smoothed the same way:

    p(x)     = (count(x) + 1) / (n + K + 1)
    p(x | z) = (n * pi_x(z) + 1) / (n + K + 1)

where K is the number of categories seen in training. A category never seen
in training gets weight 1.

With eight or more treatment columns the joint category table is replaced
by a product of one-column factors.
"""

import logging
from dataclasses import dataclass

import numpy as np

from scipy.special import expit, softmax
from sklearn.linear_model import LogisticRegression

from bdhsic.errors import DataError
from bdhsic.ratio_estimation.models import CategoricalRatioModel, as_block

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

FACTORIZE_FROM = 8


def encode_categories(x):
    """Map every row of X to the index of its category.

    Returns:
        tuple: (categories as a tuple of row tuples, codes per row).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    categories, codes = np.unique(x, axis=0, return_inverse=True)
    return tuple(tuple(row) for row in categories.tolist()), \
        np.asarray(codes).ravel()


def _lookup(categories, x):
    """Category index per row, -1 for categories not in ``categories``."""
    index = {category: position
             for position, category in enumerate(categories)}
    return np.array([index.get(tuple(row), -1) for row in x.tolist()],
                    dtype=int)


@dataclass(frozen=True)
class EmpiricalMarginal:
    """Laplace-smoothed frequency table of treatment categories."""

    categories: tuple
    counts: tuple
    n_train: int

    @classmethod
    def fit(cls, x):
        categories, codes = encode_categories(x)
        counts = np.bincount(codes, minlength=len(categories))
        return cls(categories, tuple(int(c) for c in counts), int(codes.size))

    def probabilities(self, x, features=None):
        """Smoothed p(x) per row."""
        codes = _lookup(self.categories, x)
        counts = np.append(np.asarray(self.counts, dtype=float), 0.0)
        return (counts[codes] + 1.0) \
            / (self.n_train + len(self.categories) + 1.0)

    def to_dict(self):
        return {'type': 'empirical',
                'categories': [list(c) for c in self.categories],
                'counts': list(self.counts), 'n_train': self.n_train}

    @classmethod
    def from_dict(cls, document):
        return cls(tuple(tuple(c) for c in document['categories']),
                   tuple(document['counts']), int(document['n_train']))


@dataclass(frozen=True)
class ConditionalClassifier:
    """Laplace-smoothed p(x | features) from a fitted logistic classifier.

    Only the fitted coefficients are stored; prediction is done with numpy so
    that the classifier survives a JSON round trip.
    """

    categories: tuple
    classes: tuple
    coef: tuple
    intercept: tuple
    n_train: int

    @classmethod
    def fit(cls, x, features, seed=0):
        """Fit the classifier of the category of x given ``features``.

        Raises:
            DataError: X and the features have different row counts.
        """
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features[:, np.newaxis]
        categories, codes = encode_categories(x)
        if features.shape[0] != codes.size:
            raise DataError('treatments and features have different rows')
        if len(categories) == 1:
            return cls(categories, (0,), (), (), int(codes.size))
        model = LogisticRegression(max_iter=1000, random_state=seed)
        model.fit(features, codes)
        return cls(categories, tuple(int(c) for c in model.classes_),
                   tuple(map(tuple, model.coef_.tolist())),
                   tuple(model.intercept_.tolist()), int(codes.size))

    def class_probabilities(self, features):
        """pi_c(features) for every category, one column per category."""
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features[:, np.newaxis]
        n = features.shape[0]
        probabilities = np.zeros((n, len(self.categories)))
        if len(self.classes) == 1:
            probabilities[:, self.classes[0]] = 1.0
            return probabilities
        logits = features @ np.asarray(self.coef).T \
            + np.asarray(self.intercept)
        if len(self.classes) == 2:
            positive = expit(logits[:, 0])
            fitted = np.column_stack([1.0 - positive, positive])
        else:
            fitted = softmax(logits, axis=1)
        probabilities[:, list(self.classes)] = fitted
        return probabilities

    def probabilities(self, x, features):
        """Smoothed p(x | features) per row."""
        codes = _lookup(self.categories, np.atleast_2d(x))
        pi = self.class_probabilities(features)
        known = np.where(codes >= 0,
                         pi[np.arange(codes.size), np.maximum(codes, 0)], 0.0)
        return (self.n_train * known + 1.0) \
            / (self.n_train + len(self.categories) + 1.0)

    def to_dict(self):
        return {'type': 'classifier',
                'categories': [list(c) for c in self.categories],
                'classes': list(self.classes),
                'coef': [list(row) for row in self.coef],
                'intercept': list(self.intercept), 'n_train': self.n_train}

    @classmethod
    def from_dict(cls, document):
        return cls(tuple(tuple(c) for c in document['categories']),
                   tuple(document['classes']),
                   tuple(tuple(row) for row in document['coef']),
                   tuple(document['intercept']), int(document['n_train']))


@dataclass(frozen=True)
class CategoricalFactor:
    """Ratio numerator / denominator on a subset of treatment columns.

    ``numerator_features`` and ``denominator_features`` name the inputs of
    each side among ``z`` and ``x_cont``; an empirical numerator has none.
    """

    columns: tuple
    numerator: object
    denominator: ConditionalClassifier
    numerator_features: tuple = ()
    denominator_features: tuple = ('z',)

    def ratio(self, x, inputs):
        x = np.asarray(x, dtype=float)[:, list(self.columns)]
        numerator = self.numerator.probabilities(
            x, _stack(inputs, self.numerator_features, x.shape[0]))
        denominator = self.denominator.probabilities(
            x, _stack(inputs, self.denominator_features, x.shape[0]))
        return numerator / denominator

    def to_dict(self):
        return {'columns': list(self.columns),
                'numerator': self.numerator.to_dict(),
                'denominator': self.denominator.to_dict(),
                'numerator_features': list(self.numerator_features),
                'denominator_features': list(self.denominator_features)}

    @classmethod
    def from_dict(cls, document):
        numerator = document['numerator']
        numerator = EmpiricalMarginal.from_dict(numerator) \
            if numerator['type'] == 'empirical' \
            else ConditionalClassifier.from_dict(numerator)
        return cls(tuple(document['columns']), numerator,
                   ConditionalClassifier.from_dict(document['denominator']),
                   tuple(document['numerator_features']),
                   tuple(document['denominator_features']))


def _stack(inputs, names, n):
    if not names:
        return np.zeros((n, 0))
    blocks = []
    for name in names:
        block = np.asarray(inputs[name], dtype=float)
        blocks.append(block[:, np.newaxis] if block.ndim == 1 else block)
    return np.hstack(blocks)


def fit_factors(x, inputs, numerator_features=(), seed=0):
    """One factor for X, or one per column when X has eight or more columns.

    Args:
        x (numpy.ndarray): n x p categorical treatments.
        inputs (dict): named n-row arrays, at least ``z``.
        numerator_features (tuple): inputs of the numerator; empty for the
            marginal frequency table.
        seed (int): classifier seed.

    Returns:
        tuple: (factors, factorized flag).
    """
    factorized = x.shape[1] >= FACTORIZE_FROM
    groups = [(column,) for column in range(x.shape[1])] if factorized \
        else [tuple(range(x.shape[1]))]
    denominator_features = tuple(numerator_features) + ('z',)
    factors = []
    for columns in groups:
        block = x[:, list(columns)]
        if numerator_features:
            numerator = ConditionalClassifier.fit(
                block, _stack(inputs, numerator_features, x.shape[0]), seed)
        else:
            numerator = EmpiricalMarginal.fit(block)
        denominator = ConditionalClassifier.fit(
            block, _stack(inputs, denominator_features, x.shape[0]), seed)
        factors.append(CategoricalFactor(columns, numerator, denominator,
                                         tuple(numerator_features),
                                         denominator_features))
    if factorized:
        LOGGER.info('%s treatment columns: fitting one factor per column',
                    x.shape[1])
    return factors, factorized


def train_categorical(x, z, spec):
    """Fit the categorical ratio p(x) / p(x | z) with q = p.

    Args:
        x (array-like): n x d_X categorical treatments.
        z (array-like): n x d_Z confounders.
        spec (ScorerSpec): only ``seed`` is used, for the classifiers.

    Returns:
        CategoricalRatioModel: factorized when d_X >= 8.

    Raises:
        DataError: empty input or mismatched rows.
    """
    x, z = as_block(x, 'X'), as_block(z, 'Z')
    if x.shape[0] == 0 or x.shape[1] == 0:
        raise DataError('cannot train on empty treatments')
    if x.shape[0] != z.shape[0]:
        raise DataError(f'X has {x.shape[0]} rows, Z has {z.shape[0]}')
    factors, factorized = fit_factors(x, {'z': z}, seed=spec.seed)
    return CategoricalRatioModel(factors, x.shape[1], z.shape[1],
                                 factorized=factorized)
