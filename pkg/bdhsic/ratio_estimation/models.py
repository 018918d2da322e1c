# -*- coding: utf-8 -*-
"""Trained density ratio models and weight prediction.

Every model maps rows (x, z) to a raw ratio estimate through
``raw_weights``; ``predict_weights`` turns those into the importance weights
used by the statistic, clamped to [1e-6, 1e6]. Models are not modified after
training and can be shared between threads.
"""

import enum
import logging

import numpy as np

from bdhsic.errors import DimensionError
from bdhsic.log.logging import LoggerMixin

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-6
WEIGHT_CEILING = 1e6


class ModelKind(enum.Enum):
    """Kinds of ratio model."""

    CATEGORICAL = 'categorical'
    CATEGORICAL_FACTORIZED = 'categorical_factorized'
    NCEQ = 'nce_q'
    TREQ = 'tre_q'
    MIXED_PRODUCT = 'mixed_product'
    UNIFORM_BASELINE = 'uniform_baseline'
    UNIT_WEIGHTS = 'unit_weights'


def as_block(values, name):
    """2-D float view of a treatment or confounder block."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if values.ndim != 2:
        raise DimensionError(f'{name} must be a matrix')
    return values


class RatioModel(LoggerMixin):
    """Base class of trained ratio models.

    Args:
        x_dim (int): treatment columns seen in training.
        z_dim (int): confounder columns seen in training.
    """

    kind = None

    def __init__(self, x_dim, z_dim):
        self.x_dim = x_dim
        self.z_dim = z_dim

    def check_inputs(self, x, z):
        """Validated 2-D blocks with the training dimensions."""
        x, z = as_block(x, 'X'), as_block(z, 'Z')
        if x.shape[0] != z.shape[0]:
            raise DimensionError(f'X has {x.shape[0]} rows, Z has '
                                 f'{z.shape[0]}')
        if x.shape[1] != self.x_dim or z.shape[1] != self.z_dim:
            raise DimensionError(
                f'model trained on ({self.x_dim}, {self.z_dim}) columns, '
                f'got ({x.shape[1]}, {z.shape[1]})')
        return x, z

    def raw_weights(self, x, z):
        raise NotImplementedError

    def describe(self):
        return {'kind': self.kind.value, 'x_dim': self.x_dim,
                'z_dim': self.z_dim}


class ScorerRatioModel(RatioModel):
    """NCE-q (one scorer) or TRE-q (one scorer per bridge) model.

    The log-weight is the sum of the scorer outputs on (x, z).

    Args:
        scorers (list): trained ``Scorer`` objects.
        x_dim (int): treatment columns.
        z_dim (int): confounder columns.
        schedule (BridgeSchedule): bridge schedule; None for NCE-q.
        reports (list): one ``TrainingReport`` per scorer, if known.
    """

    def __init__(self, scorers, x_dim, z_dim, schedule=None, reports=None):
        super().__init__(x_dim, z_dim)
        self.scorers = list(scorers)
        self.schedule = schedule
        self.reports = list(reports or [])

    @property
    def kind(self):
        return ModelKind.NCEQ if self.schedule is None else ModelKind.TREQ

    @property
    def converged(self):
        return all(report.converged for report in self.reports)

    def bridge_log_ratios(self, x, z):
        """Per-bridge log-ratios, one column per scorer."""
        x, z = self.check_inputs(x, z)
        inputs = np.hstack([x, z])
        return np.column_stack([scorer.score(inputs)
                                for scorer in self.scorers])

    def log_weights(self, x, z):
        return self.bridge_log_ratios(x, z).sum(axis=1)

    def raw_weights(self, x, z):
        with np.errstate(over='ignore'):
            return np.exp(self.log_weights(x, z))

    def describe(self):
        description = super().describe()
        description['bridges'] = len(self.scorers)
        description['converged'] = self.converged
        return description


class CategoricalRatioModel(RatioModel):
    """Product of categorical factors p(x) / p(x | z).

    Args:
        factors (list): ``CategoricalFactor`` objects over disjoint columns.
        x_dim (int): treatment columns.
        z_dim (int): confounder columns.
        factorized (bool): one factor per column.
    """

    def __init__(self, factors, x_dim, z_dim, factorized=False):
        super().__init__(x_dim, z_dim)
        self.factors = list(factors)
        self.factorized = factorized

    @property
    def kind(self):
        return ModelKind.CATEGORICAL_FACTORIZED if self.factorized \
            else ModelKind.CATEGORICAL

    def raw_weights(self, x, z, x_cont=None):
        x, z = self.check_inputs(x, z)
        inputs = {'z': z}
        if x_cont is not None:
            inputs['x_cont'] = as_block(x_cont, 'X_cont')
        weights = np.ones(x.shape[0])
        for factor in self.factors:
            weights = weights * factor.ratio(x, inputs)
        return weights

    def describe(self):
        description = super().describe()
        description['factorized'] = self.factorized
        return description


class MixedProductModel(RatioModel):
    """Categorical factor times continuous factor for mixed treatments.

    Args:
        categorical (CategoricalRatioModel): p(x_cat | x_cont) over
            p(x_cat | z, x_cont).
        continuous (ScorerRatioModel): ratio on (x_cont, z).
        cat_columns (tuple): categorical columns of X.
        cont_columns (tuple): continuous columns of X.
    """

    kind = ModelKind.MIXED_PRODUCT

    def __init__(self, categorical, continuous, cat_columns, cont_columns):
        super().__init__(len(cat_columns) + len(cont_columns),
                         continuous.z_dim)
        self.categorical = categorical
        self.continuous = continuous
        self.cat_columns = tuple(cat_columns)
        self.cont_columns = tuple(cont_columns)

    def split(self, x):
        return x[:, list(self.cat_columns)], x[:, list(self.cont_columns)]

    def factor_weights(self, x, z):
        """The categorical and the continuous factor separately."""
        x, z = self.check_inputs(x, z)
        x_cat, x_cont = self.split(x)
        return (self.categorical.raw_weights(x_cat, z, x_cont=x_cont),
                self.continuous.raw_weights(x_cont, z))

    def raw_weights(self, x, z):
        categorical, continuous = self.factor_weights(x, z)
        return categorical * continuous


class UniformBaselineModel(RatioModel):
    """Ignores its inputs; weights are i.i.d. Uniform(0, 1) draws."""

    kind = ModelKind.UNIFORM_BASELINE

    def __init__(self, seed=0):
        super().__init__(None, None)
        self.seed = seed

    def raw_weights(self, x, z):
        n = as_block(x, 'X').shape[0]
        return np.random.default_rng(self.seed).uniform(size=n)

    def describe(self):
        return {'kind': self.kind.value, 'seed': self.seed}


class UnitWeightModel(RatioModel):
    """Every row gets weight 1; the statistic reduces to plain HSIC."""

    kind = ModelKind.UNIT_WEIGHTS

    def __init__(self):
        super().__init__(None, None)

    def raw_weights(self, x, z):
        return np.ones(as_block(x, 'X').shape[0])

    def describe(self):
        return {'kind': self.kind.value}


def clip_weights(raw, floor=WEIGHT_FLOOR, ceiling=WEIGHT_CEILING):
    """Clamp raw ratios into [floor, ceiling].

    Returns:
        tuple: (clamped weights, number of clamped entries).
    """
    raw = np.asarray(raw, dtype=float)
    clamped = int(np.count_nonzero(~np.isfinite(raw) | (raw < floor)
                                   | (raw > ceiling)))
    raw = np.nan_to_num(raw, nan=floor, posinf=ceiling, neginf=floor)
    return np.clip(raw, floor, ceiling), clamped


def predict_weights(model, x, z, return_clamped=False):
    """Importance weights of ``model`` on the rows (x, z).

    Args:
        model (RatioModel): trained model.
        x (array-like): n x d_X treatments.
        z (array-like): n x d_Z confounders.
        return_clamped (bool): also return the number of clamped weights.

    Returns:
        numpy.ndarray: finite positive weights, or (weights, clamped).

    Raises:
        DimensionError: dimensions differ from training.
    """
    weights, clamped = clip_weights(model.raw_weights(x, z))
    if clamped:
        LOGGER.warning('%s of %s weights clamped to [%s, %s]', clamped,
                       weights.size, WEIGHT_FLOOR, WEIGHT_CEILING)
    if return_clamped:
        return weights, clamped
    return weights
