# -*- coding: utf-8 -*-
"""Permutation null distribution and p-value of the weighted statistic.

The null sample is obtained by permuting the outcome Gram matrix L
simultaneously over rows and columns while the weights and the treatment
matrices stay fixed. Permutation ``i`` draws from its own random stream,
spawned from ``seed``, so the sample does not depend on evaluation order.
"""

import numpy as np

from bdhsic.errors import ConfigError, DataError
from bdhsic.statistic.hsic import weighted_terms

DEFAULT_PERMUTATIONS = 250


def permutation_streams(seed, n_q):
    """One independent generator per permutation index."""
    children = np.random.SeedSequence(seed).spawn(n_q)
    return [np.random.default_rng(child) for child in children]


def permuted_statistic(inputs, order):
    """Statistic with L replaced by L[order][:, order]."""
    order = np.asarray(order)
    permuted = inputs.L[np.ix_(order, order)]
    first, second, third = weighted_terms(inputs, permuted)
    return float(first + second - third)


def permutation_null(inputs, n_q=DEFAULT_PERMUTATIONS, seed=0):
    """Sample the statistic under random outcome permutations.

    Args:
        inputs (StatisticInputs): test-half matrices and weights.
        n_q (int): number of permutations.
        seed (int): root seed of the permutation streams.

    Returns:
        numpy.ndarray: ``n_q`` permuted statistics.

    Raises:
        ConfigError: ``n_q`` < 1.
    """
    if int(n_q) < 1:
        raise ConfigError(f'n_q must be at least 1, got {n_q}')
    return np.array([
        permuted_statistic(inputs, rng.permutation(inputs.n))
        for rng in permutation_streams(seed, int(n_q))
    ])


def p_value(statistic, null_sample):
    """Two-sided permutation p-value.

    With c = #{statistic < null_i} (ties do not count) and
    f = (1 + c) / (1 + |null|), the p-value is 2 min(1 - f, f).

    Args:
        statistic (float): observed statistic.
        null_sample (array-like): permuted statistics.

    Returns:
        float: p-value in [0, 1].

    Raises:
        DataError: empty null sample.
    """
    null_sample = np.asarray(null_sample, dtype=float).ravel()
    if null_sample.size == 0:
        raise DataError('p-value needs a non-empty null sample')
    exceed = np.count_nonzero(statistic < null_sample)
    fraction = (1.0 + exceed) / (1.0 + null_sample.size)
    return float(2.0 * min(1.0 - fraction, fraction))
