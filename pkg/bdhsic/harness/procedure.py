# -*- coding: utf-8 -*-
"""The bd-HSIC test procedure on one dataset.

``run_test`` follows these steps:

1. split the rows: the first ceil(n/2) rows train, the rest test;
2. resolve q on the training half (c_q for continuous treatments, q = p
   otherwise, the generator's q for the true weights);
3. draw one q-sample per row, each half from its own rows;
4. train the density ratio on the training half;
5. predict the weights of the test half;
6. compute the statistic, its permutation null and the p-value on the test
   half.

``marginal_hsic_test`` runs the ordinary HSIC permutation test of X against
Y on the same test half, ignoring Z.
"""

import logging
import math
from dataclasses import replace

import numpy as np

from bdhsic.errors import ConfigError, DataError, EstimatorError
from bdhsic.harness.config import AUTO_Q, Estimator
from bdhsic.kernels.gram import as_points, gram
from bdhsic.log.timing import timeit
from bdhsic.q_marginal.cq import select_q
from bdhsic.q_marginal.sampling import QMode, QSpec, sample_q
from bdhsic.ratio_estimation.categorical import train_categorical
from bdhsic.ratio_estimation.mixed import mixed_from_kinds
from bdhsic.ratio_estimation.models import UniformBaselineModel, \
    UnitWeightModel, predict_weights
from bdhsic.ratio_estimation.nce import BridgeSchedule, product_pairs, \
    train_nce_q, train_tre_q
from bdhsic.statistic.hsic import StatisticInputs, TestResult, \
    bd_hsic_statistic, ess, hsic_biased
from bdhsic.statistic.permutation import p_value, permutation_null

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

MIN_ROWS = 20
SEED_STREAMS = ('q', 'estimator', 'bandwidth', 'permutation', 'q_test')


def sub_seeds(seed):
    """One integer seed per random stream of a test, derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(len(SEED_STREAMS))
    return {name: int(child.generate_state(1)[0])
            for name, child in zip(SEED_STREAMS, children)}


def split_point(n):
    """Rows of the training half: ceil(n / 2).

    Raises:
        DataError: fewer than 20 rows.
    """
    if n < MIN_ROWS:
        raise DataError(f'the test needs at least {MIN_ROWS} rows, got {n}')
    return math.ceil(n / 2)


def build_inputs(x, y, x_q, weights, kernel_x, kernel_y, seed=0):
    """Gram matrices and weights of the test half.

    Adaptive bandwidths are chosen by the median heuristic on x for the
    treatment kernel and on y for the outcome kernel; K, Kq and KQ share the
    treatment bandwidth.

    Args:
        x (array-like): n x d_X test-half treatments.
        y (array-like): n x d_Y test-half outcomes.
        x_q (array-like): m x d_X q-samples.
        weights (array-like): n importance weights.
        kernel_x (KernelSpec): treatment kernel.
        kernel_y (KernelSpec): outcome kernel.
        seed (int): median heuristic subsampling seed.

    Returns:
        tuple: (StatisticInputs, resolved kernel_x, resolved kernel_y).
    """
    x, y, x_q = as_points(x, 'x'), as_points(y, 'y'), as_points(x_q, 'x_q')
    kernel_x = kernel_x.resolve(x, seed=seed)
    kernel_y = kernel_y.resolve(y, seed=seed)
    inputs = StatisticInputs(gram(x, x, kernel_x), gram(y, y, kernel_y),
                             gram(x, x_q, kernel_x), gram(x_q, x_q, kernel_x),
                             weights)
    return inputs, kernel_x, kernel_y


def resolve_q(data, config, train, seed):
    """The q policy of a test.

    Args:
        data (Dataset): the full dataset.
        config (TestConfig): test settings.
        train (slice): training-half rows.
        seed (int): seed of the q draws.

    Returns:
        QSpec: the policy to sample x^q with.
    """
    estimator = config.estimator
    if estimator is Estimator.TRUE_WEIGHTS:
        if data.reference_q is None:
            LOGGER.warning('dataset has no reference q; using q = p')
            return QSpec(QMode.RESAMPLE, seed=seed)
        return QSpec(QMode.REFERENCE, seed=seed, reference=data.reference_q)
    if config.q != AUTO_Q:
        if config.q.mode is QMode.IDENTITY \
                and estimator in (Estimator.NCEQ, Estimator.TREQ):
            raise ConfigError(f'{estimator.value} cannot train against '
                              f'identity q-samples')
        return replace(config.q, seed=seed)
    if estimator in (Estimator.NCEQ, Estimator.TREQ) \
            and not (data.is_categorical or data.is_mixed):
        return select_q(data.x[train], data.z[train], seed=seed)
    return QSpec(QMode.RESAMPLE, seed=seed)


def train_ratio(data, config, q_spec, x_q, train, seed):
    """Fit the density ratio of ``config.estimator`` on the training half.

    ``x_q`` holds the q-samples drawn from the training rows.

    Returns:
        RatioModel: trained model, or None for the true weights.

    Raises:
        EstimatorError: training failed; the message names the estimator
            and the training size.
    """
    estimator = config.estimator
    if estimator is Estimator.TRUE_WEIGHTS:
        return None
    if estimator is Estimator.UNIFORM_BASELINE:
        return UniformBaselineModel(seed)
    if estimator is Estimator.UNIT_WEIGHTS:
        return UnitWeightModel()

    x, z = data.x[train], data.z[train]
    spec = config.scorer.with_seed(seed)
    try:
        if estimator is Estimator.CATEGORICAL:
            return train_categorical(x, z, spec)
        if estimator is Estimator.MIXED_PRODUCT:
            return mixed_from_kinds(x, z, data.x_kinds, spec)
        if estimator is Estimator.TREQ:
            return train_tre_q((x, z), (x_q, z),
                               BridgeSchedule.linear(config.bridges), spec)
        if q_spec.mode is QMode.RESAMPLE:
            product = product_pairs(x, z, seed=seed)
        else:
            product = (x_q, z)
        return train_nce_q((x, z), product, spec)
    except EstimatorError as error:
        LOGGER.error('%s training failed on %s rows: %s', estimator.value,
                     x.shape[0], error)
        raise EstimatorError(f'{estimator.value} training failed on '
                             f'{x.shape[0]} rows: {error}') from error


def _permutation_test(inputs, config, seed):
    statistic = bd_hsic_statistic(inputs)
    null_sample = permutation_null(inputs, config.n_q, seed=seed)
    return statistic, null_sample, p_value(statistic, null_sample)


@timeit
def run_test(data, config, model=None, return_model=False):
    """Test p(y | do(x)) = p(y) on one dataset.

    Args:
        data (Dataset): observations, at least 20 rows.
        config (TestConfig): test settings.
        model (RatioModel): a trained model to use instead of training
            one; ignored for the true weights.
        return_model (bool): also return the model used.

    Returns:
        TestResult: statistic, null sample, p-value, ESS and diagnostics;
        (TestResult, model) when ``return_model`` is set.

    Raises:
        DataError: too few rows, or true weights the dataset lacks.
        EstimatorError: the density ratio could not be trained.
        ConfigError: identity q-samples with NCE-q or TRE-q.
    """
    cut = split_point(data.n)
    train, test = slice(0, cut), slice(cut, data.n)
    seeds = sub_seeds(config.seed)

    q_spec = resolve_q(data, config, train, seeds['q'])
    x_q_train = sample_q(data.x[train], q_spec)
    x_q_test = sample_q(data.x[test],
                        replace(q_spec, seed=seeds['q_test']))

    if config.estimator is Estimator.TRUE_WEIGHTS:
        if data.true_weights is None:
            raise DataError('the dataset carries no true weights')
        weights, clamped = data.true_weights[test], 0
    else:
        if model is None:
            model = train_ratio(data, config, q_spec, x_q_train, train,
                                seeds['estimator'])
        weights, clamped = predict_weights(model, data.x[test], data.z[test],
                                           return_clamped=True)

    inputs, kernel_x, kernel_y = build_inputs(
        data.x[test], data.y[test], x_q_test, weights, config.kernel_x,
        config.kernel_y, seed=seeds['bandwidth'])
    statistic, null_sample, p = _permutation_test(inputs, config,
                                                  seeds['permutation'])

    diagnostics = {
        'procedure': 'bd_hsic',
        'estimator': config.estimator.value,
        'n_train': cut,
        'clamped': clamped,
        'bandwidth_x': kernel_x.bandwidth,
        'bandwidth_y': kernel_y.bandwidth,
    }
    diagnostics.update(q_spec.describe())
    if model is not None:
        diagnostics['model'] = model.describe()
        diagnostics['converged'] = bool(getattr(model, 'converged', True))
    result = TestResult(statistic, null_sample, p, ess(weights),
                        data.n - cut, diagnostics)
    LOGGER.info('%s: statistic %.3e, p-value %.4f, ESS %.1f',
                config.estimator.value, statistic, p, result.ess)
    if return_model:
        return result, model
    return result


@timeit
def marginal_hsic_test(data, config):
    """Ordinary HSIC permutation test of X against Y, ignoring Z.

    Runs on the same test half as ``run_test``, with unit weights and the
    test-half treatments as q-samples.

    Args:
        data (Dataset): observations, at least 20 rows.
        config (TestConfig): kernels, n_q and seed are used.

    Returns:
        TestResult: the HSIC test outcome.

    Raises:
        DataError: too few rows.
    """
    cut = split_point(data.n)
    test = slice(cut, data.n)
    seeds = sub_seeds(config.seed)
    x, y = data.x[test], data.y[test]
    inputs, kernel_x, kernel_y = build_inputs(
        x, y, x, np.ones(data.n - cut), config.kernel_x, config.kernel_y,
        seed=seeds['bandwidth'])
    statistic = hsic_biased(inputs.K, inputs.L)
    null_sample = permutation_null(inputs, config.n_q,
                                   seed=seeds['permutation'])
    p = p_value(statistic, null_sample)
    LOGGER.info('marginal HSIC: statistic %.3e, p-value %.4f', statistic, p)
    return TestResult(statistic, null_sample, p, float(data.n - cut),
                      data.n - cut,
                      {'procedure': 'marginal_hsic', 'n_train': cut,
                       'bandwidth_x': kernel_x.bandwidth,
                       'bandwidth_y': kernel_y.bandwidth})
