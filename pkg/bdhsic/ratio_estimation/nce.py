# -*- coding: utf-8 -*-
"""NCE-q and TRE-q ratio estimators for continuous treatments.

NCE-q trains one scorer to tell product samples (x^q, z) from joint samples
(x, z); the scorer then estimates q(x) p(z) / p(x, z) = q(x) / p(x | z).

TRE-q splits the same ratio into m bridges along the path

    x_k = sqrt(1 - alpha_k^2) x + alpha_k x^q,    z fixed,

with 0 = alpha_0 < ... < alpha_m = 1. Bridge k tells level k + 1 from level k
and the weight is the product of the m bridge ratios. The bridges share no
parameters, so they are trained one after another.
"""

import logging
from dataclasses import dataclass

import numpy as np

from bdhsic.errors import ConfigError, DataError
from bdhsic.ratio_estimation.models import ScorerRatioModel, as_block
from bdhsic.ratio_estimation.scorer import ScorerSpec, ScorerTrainer

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

DEFAULT_BRIDGES = 3


@dataclass(frozen=True)
class BridgeSchedule:
    """Increasing interpolation levels alpha_0 = 0 < ... < alpha_m = 1."""

    alphas: tuple

    def __post_init__(self):
        alphas = tuple(float(alpha) for alpha in self.alphas)
        if len(alphas) < 2:
            raise ConfigError('a bridge schedule needs at least two levels')
        if alphas[0] != 0.0 or alphas[-1] != 1.0:
            raise ConfigError('a bridge schedule runs from 0 to 1')
        if any(b <= a for a, b in zip(alphas[:-1], alphas[1:])):
            raise ConfigError('bridge levels must be strictly increasing')
        object.__setattr__(self, 'alphas', alphas)

    @classmethod
    def linear(cls, m=DEFAULT_BRIDGES):
        """alpha_k = k / m."""
        if int(m) < 1:
            raise ConfigError('a bridge schedule needs m >= 1')
        return cls(tuple(k / m for k in range(int(m) + 1)))

    @property
    def m(self):
        return len(self.alphas) - 1

    def to_dict(self):
        return {'alphas': list(self.alphas)}


def derangement(n, rng):
    """Random permutation of range(n) with no fixed point."""
    if n < 2:
        raise DataError('a derangement needs at least two rows')
    while True:
        order = rng.permutation(n)
        if not np.any(order == np.arange(n)):
            return order


def product_pairs(x, z, seed=0):
    """Product-of-marginals pairs for q = p.

    Rows of X are shuffled by a seeded derangement and paired with the
    unshuffled Z, so no row keeps its own treatment.

    Returns:
        tuple: (shuffled X, Z).
    """
    x, z = as_block(x, 'X'), as_block(z, 'Z')
    order = derangement(x.shape[0], np.random.default_rng(seed))
    return x[order], z


def interpolate(x, x_q, alpha):
    """Bridge level sqrt(1 - alpha^2) x + alpha x^q."""
    return np.sqrt(1.0 - alpha ** 2) * x + alpha * x_q


def _pairs(pairs, name):
    x, z = pairs
    x, z = as_block(x, f'{name} X'), as_block(z, f'{name} Z')
    if x.shape[0] != z.shape[0]:
        raise DataError(f'{name} X and Z have different rows')
    return x, z


def train_nce_q(joint, product, spec):
    """Train the NCE-q ratio on joint and product pairs.

    Args:
        joint (tuple): (X, Z) observed pairs.
        product (tuple): (X^q, Z) product pairs.
        spec (ScorerSpec): scorer settings.

    Returns:
        ScorerRatioModel: NCE-q model.

    Raises:
        DataError: dimensions of the two datasets differ.
        EstimatorError: degenerate training data.
    """
    x, z = _pairs(joint, 'joint')
    x_q, z_q = _pairs(product, 'product')
    if x.shape[1] != x_q.shape[1] or z.shape[1] != z_q.shape[1]:
        raise DataError('joint and product pairs have different widths')
    scorer, report = ScorerTrainer(spec).fit(np.hstack([x_q, z_q]),
                                             np.hstack([x, z]))
    if not report.converged:
        LOGGER.warning('NCE-q stopped at max_epochs without converging')
    return ScorerRatioModel([scorer], x.shape[1], z.shape[1],
                            reports=[report])


def train_tre_q(joint, product, schedule=None, spec=None):
    """Train the TRE-q ratio as a product of bridge ratios.

    Only the treatments of ``product`` are used; every level keeps the
    confounders of ``joint``. Bridge k is trained with seed spec.seed + k,
    so a one-bridge schedule reproduces ``train_nce_q`` on (X^q, Z).

    Args:
        joint (tuple): (X, Z) observed pairs.
        product (tuple): (X^q, Z') product pairs, X^q with the rows of X.
        schedule (BridgeSchedule): levels; linear with three bridges by
            default.
        spec (ScorerSpec): scorer settings.

    Returns:
        ScorerRatioModel: TRE-q model.
    """
    schedule = schedule or BridgeSchedule.linear()
    spec = spec or ScorerSpec()
    x, z = _pairs(joint, 'joint')
    x_q = as_block(product[0], 'product X')
    if x_q.shape != x.shape:
        raise DataError('TRE-q needs one q-sample per joint row')

    scorers, reports = [], []
    for k in range(schedule.m):
        lower = interpolate(x, x_q, schedule.alphas[k])
        upper = interpolate(x, x_q, schedule.alphas[k + 1])
        trainer = ScorerTrainer(spec.with_seed(spec.seed + k))
        scorer, report = trainer.fit(np.hstack([upper, z]),
                                     np.hstack([lower, z]))
        if not report.converged:
            LOGGER.warning('TRE-q bridge %s stopped without converging', k)
        scorers.append(scorer)
        reports.append(report)
    return ScorerRatioModel(scorers, x.shape[1], z.shape[1],
                            schedule=schedule, reports=reports)
