# -*- coding: utf-8 -*-
"""Seeded synthetic datasets with known importance weights.

The continuous and mixed generators draw treatments from a wide proposal
p_X, draw (Y, Z) jointly Gaussian, shift Y by a function of X and then keep
each row with probability proportional to

    omega = p(x | z) / p_X(x),

so that the kept rows follow p(z) p(x | z) p(y | x, z). The true weights of
a kept row are p_X(x) / p(x | z) = 1 / omega, with p_X as q.

Every generator is a pure function of its ``GenParams`` (seed included).
"""

import functools
import logging
import math

import numpy as np

from scipy import stats
from scipy.special import expit, log_expit

from bdhsic.errors import ConfigError, DataError, DimensionError
from bdhsic.log.timing import timeit
from bdhsic.q_marginal.sampling import ReferenceQ
from bdhsic.simgen.dataset import Dataset, Dependence, GenParams

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

BATCH_FACTOR = 4
ENVELOPE_MARGIN = 1.2
MIN_ACCEPTANCE = 1e-4
CONFOUNDED_DIMS = 3
MARGINAL_DRAWS = 10 ** 6
EIGEN_FLOOR = 1e-6
SHAPES = (Dependence.LINEAR, Dependence.QUADRATIC, Dependence.COSINE)


def dependence_shape(dependence, x):
    """f(x) applied elementwise: x, x^2 or exp(-0.1 x^2) cos(pi x)."""
    if dependence is Dependence.LINEAR:
        return x
    if dependence is Dependence.QUADRATIC:
        return x ** 2
    if dependence is Dependence.COSINE:
        return np.exp(-0.1 * x ** 2) * np.cos(math.pi * x)
    raise ConfigError(f'{dependence.value} is not an X -> Y shape')


def outcome_shift(params, x):
    """beta_xy * sum_j f(x_j), one value per row."""
    return params.beta_xy * dependence_shape(params.dependence, x).sum(axis=1)


def confounding_vector(params):
    """beta_xz on the first three confounders, 0 after."""
    beta = np.zeros(params.d_z)
    beta[:min(CONFOUNDED_DIMS, params.d_z)] = params.beta_xz
    return beta


def coupling_covariance(d_y, d_z, beta_yz):
    """Covariance of (Y, Z): unit diagonal, beta_yz on aligned Y-Z pairs.

    Pairs (y_k, z_k) for k below min(3, d_y, d_z) get covariance beta_yz;
    every other off-diagonal entry is 0. A matrix that is not positive
    definite is projected by flooring its eigenvalues and rescaling to a
    unit diagonal.
    """
    size = d_y + d_z
    sigma = np.eye(size)
    for k in range(min(CONFOUNDED_DIMS, d_y, d_z)):
        sigma[k, d_y + k] = sigma[d_y + k, k] = beta_yz
    values, vectors = np.linalg.eigh(sigma)
    if values.min() <= EIGEN_FLOOR:
        LOGGER.warning('coupling covariance not positive definite, '
                       'projecting (beta_yz = %s)', beta_yz)
        sigma = (vectors * np.maximum(values, EIGEN_FLOOR)) @ vectors.T
        scale = np.sqrt(np.diag(sigma))
        sigma = sigma / np.outer(scale, scale)
    return sigma


def draw_coupled(params, size, rng, beta_yz=None):
    """Raw (Y, Z) draws from N(0, Sigma)."""
    sigma = coupling_covariance(params.d_y, params.d_z,
                                params.beta_yz if beta_yz is None
                                else beta_yz)
    draws = rng.standard_normal((size, params.d_y + params.d_z)) \
        @ np.linalg.cholesky(sigma).T
    return draws[:, :params.d_y], draws[:, params.d_y:]


def rejection_sample(n, propose, rng):
    """Keep proposed rows with probability omega / envelope until n are kept.

    ``propose(size, rng)`` returns a dict of row-aligned arrays including
    ``log_omega`` and ``log_bound``, the supremum of log omega over x for the
    row's z. omega has mean 1 under the proposal, so 1 / envelope is the
    expected acceptance rate. The envelope is 1.2 times the largest bound of
    the first batch and is raised, with ``bound_exceeded`` set, when a later
    batch goes above it.

    Returns:
        tuple: (dict of the first n kept rows, metadata).

    Raises:
        DataError: the expected acceptance rate is below 1e-4.
    """
    kept, kept_count, drawn = [], 0, 0
    log_envelope = None
    bound_exceeded = False
    batches = 0
    while kept_count < n:
        batch = propose(BATCH_FACTOR * n, rng)
        log_omega = batch.pop('log_omega')
        top = float(batch.pop('log_bound').max())
        if log_envelope is None:
            log_envelope = top + math.log(ENVELOPE_MARGIN)
        elif top > log_envelope:
            bound_exceeded = True
            log_envelope = top + math.log(ENVELOPE_MARGIN)
        if log_envelope > -math.log(MIN_ACCEPTANCE):
            raise DataError(
                f'expected acceptance rate {math.exp(-log_envelope):.2e} is '
                f'below {MIN_ACCEPTANCE}; the parameters leave too little '
                f'overlap between proposal and target')
        accept = np.log(rng.uniform(size=log_omega.size)) \
            <= log_omega - log_envelope
        batch['log_omega'] = log_omega
        kept.append({name: values[accept] for name, values in batch.items()})
        kept_count += int(accept.sum())
        drawn += log_omega.size
        batches += 1
    rows = {name: np.concatenate([part[name] for part in kept])[:n]
            for name in kept[0]}
    metadata = {'acceptance_rate': kept_count / drawn, 'batches': batches,
                'bound_exceeded': bound_exceeded}
    if bound_exceeded:
        LOGGER.warning('rejection envelope exceeded after the first batch')
    return rows, metadata


def _require_univariate(params, name):
    if (params.d_x, params.d_y, params.d_z) != (1, 1, 1):
        raise DimensionError(f'the {name} generator is univariate')


@functools.lru_cache(maxsize=None)
def binary_marginal(draws=MARGINAL_DRAWS, seed=0):
    """P(X = 1) = E[sigmoid(Z)], Z ~ N(0, 1), by Monte Carlo."""
    z = np.random.default_rng(seed).standard_normal(draws)
    return float(expit(z).mean())


@timeit
def gen_binary(params):
    """Binary treatment with a logistic propensity.

    H0: Y | Z ~ N(beta_xy Z, tau^2); H1: Y | X, Z ~ N(beta_xy (2X - 1) |Z|,
    tau^2), with X | Z ~ Bernoulli(sigmoid(Z)) and tau^2 = theta.

    Raises:
        DimensionError: any dimension above 1.
    """
    _require_univariate(params, 'binary')
    rng = np.random.default_rng(params.seed)
    n = params.n
    z = rng.standard_normal(n)
    propensity = expit(z)
    x = (rng.uniform(size=n) < propensity).astype(float)
    tau = math.sqrt(params.theta)
    if params.alternative:
        location = params.beta_xy * (2 * x - 1) * np.abs(z)
    else:
        location = params.beta_xy * z
    y = location + tau * rng.standard_normal(n)

    marginal = binary_marginal()
    numerator = np.where(x == 1, marginal, 1 - marginal)
    conditional = np.where(x == 1, propensity, 1 - propensity)
    return Dataset(x, y, z, true_weights=numerator / conditional,
                   ground_truth_null=not params.alternative
                   or params.beta_xy == 0,
                   params=params, x_kinds=('binary',),
                   reference_q=ReferenceQ.iid('bernoulli', marginal, 1))


def _check_shape(params):
    if params.dependence not in SHAPES:
        raise ConfigError(f'dependence {params.dependence.value} needs its '
                          f'own generator')
    if params.theta <= 1:
        raise ConfigError('theta must exceed 1 so that the proposal is wider '
                          'than X | Z')


def gaussian_log_bound(mean, proposal_std, conditional_std):
    """sup over x of log N(x; mean, c^2) - log N(x; 0, p^2), per coordinate.

    Equals log(p / c) + mean^2 / (2 (p^2 - c^2)) for p > c.
    """
    gap = proposal_std ** 2 - conditional_std ** 2
    return math.log(proposal_std / conditional_std) + mean ** 2 / (2 * gap)


@timeit
def gen_continuous(params):
    """Continuous treatments confounded by Z, by rejection sampling.

    X is proposed from N(0, theta phi I); X | Z ~ N(Z beta_xz, phi I) after
    rejection; Y = Y_raw + beta_xy sum_j f(x_j) with (Y_raw, Z) ~ N(0, Sigma).
    """
    _check_shape(params)
    rng = np.random.default_rng(params.seed)
    beta = confounding_vector(params)
    proposal_std = math.sqrt(params.theta * params.phi)
    conditional_std = math.sqrt(params.phi)

    def propose(size, rng):
        x = rng.normal(0.0, proposal_std, size=(size, params.d_x))
        y_raw, z = draw_coupled(params, size, rng)
        mean = (z @ beta)[:, np.newaxis]
        log_omega = (stats.norm.logpdf(x, mean, conditional_std)
                     - stats.norm.logpdf(x, 0.0, proposal_std)).sum(axis=1)
        log_bound = params.d_x * gaussian_log_bound(
            mean[:, 0], proposal_std, conditional_std)
        y = y_raw + outcome_shift(params, x)[:, np.newaxis]
        return {'x': x, 'y': y, 'z': z, 'log_omega': log_omega,
                'log_bound': log_bound}

    rows, metadata = rejection_sample(params.n, propose, rng)
    return Dataset(rows['x'], rows['y'], rows['z'],
                   true_weights=np.exp(-rows['log_omega']),
                   ground_truth_null=params.beta_xy == 0, params=params,
                   reference_q=ReferenceQ.iid('gaussian', proposal_std,
                                              params.d_x),
                   metadata=metadata)


@timeit
def gen_mixed(params):
    """Half continuous, half binary treatments, by rejection sampling.

    The continuous half follows ``gen_continuous``; the binary half is
    proposed from Bernoulli(0.5) and kept so that X_bin | Z ~
    Bernoulli(sigmoid(Z beta_xz)).

    Raises:
        DimensionError: odd d_x.
    """
    _check_shape(params)
    if params.d_x % 2:
        raise DimensionError('mixed treatments need an even d_x')
    rng = np.random.default_rng(params.seed)
    half = params.d_x // 2
    beta = confounding_vector(params)
    proposal_std = math.sqrt(params.theta * params.phi)
    conditional_std = math.sqrt(params.phi)

    def propose(size, rng):
        x_cont = rng.normal(0.0, proposal_std, size=(size, half))
        x_bin = rng.integers(0, 2, size=(size, half)).astype(float)
        y_raw, z = draw_coupled(params, size, rng)
        mean = (z @ beta)[:, np.newaxis]
        log_omega = (stats.norm.logpdf(x_cont, mean, conditional_std)
                     - stats.norm.logpdf(x_cont, 0.0, proposal_std)
                     ).sum(axis=1)
        log_omega += (x_bin * log_expit(mean)
                      + (1 - x_bin) * log_expit(-mean)
                      - math.log(0.5)).sum(axis=1)
        log_bound = half * (
            gaussian_log_bound(mean[:, 0], proposal_std, conditional_std)
            + log_expit(np.abs(mean[:, 0])) - math.log(0.5))
        x = np.hstack([x_cont, x_bin])
        y = y_raw + outcome_shift(params, x)[:, np.newaxis]
        return {'x': x, 'y': y, 'z': z, 'log_omega': log_omega,
                'log_bound': log_bound}

    rows, metadata = rejection_sample(params.n, propose, rng)
    reference = ReferenceQ(tuple([('gaussian', proposal_std)] * half
                                 + [('bernoulli', 0.5)] * half))
    return Dataset(rows['x'], rows['y'], rows['z'],
                   true_weights=np.exp(-rows['log_omega']),
                   ground_truth_null=params.beta_xy == 0, params=params,
                   x_kinds=('continuous',) * half + ('binary',) * half,
                   reference_q=reference, metadata=metadata)


def _exponential_from_normal(raw, scale):
    """Exp(scale) draw with the same normal quantile as ``raw``."""
    return -scale * stats.norm.logsf(raw)


@timeit
def gen_exponential_marginal(params):
    """Exponential marginals: X and Y dependent, do-null when beta_xy = 0.

    Z ~ Exp(1) and Y share a Gaussian copula of correlation beta_yz; X is
    proposed from Exp(theta phi) and kept so that X | Z ~
    Exp(theta phi / (1 + beta_xz Z)); Y | X, Z has scale exp(beta_xy X).
    """
    _require_univariate(params, 'exponential marginal')
    if params.beta_xz < 0:
        raise ConfigError('beta_xz must be non-negative for exponential '
                          'treatments')
    rng = np.random.default_rng(params.seed)
    proposal_scale = params.theta * params.phi
    proposal_rate = 1.0 / proposal_scale

    def propose(size, rng):
        x = rng.exponential(proposal_scale, size=size)
        y_raw, z_raw = draw_coupled(params, size, rng)
        z = _exponential_from_normal(z_raw[:, 0], 1.0)
        rate = proposal_rate * (1.0 + params.beta_xz * z)
        log_bound = np.log(rate / proposal_rate)
        log_omega = log_bound - (rate - proposal_rate) * x
        y = _exponential_from_normal(y_raw[:, 0],
                                     np.exp(params.beta_xy * x))
        return {'x': x, 'y': y, 'z': z, 'log_omega': log_omega,
                'log_bound': log_bound}

    rows, metadata = rejection_sample(params.n, propose, rng)
    return Dataset(rows['x'], rows['y'], rows['z'],
                   true_weights=np.exp(-rows['log_omega']),
                   ground_truth_null=params.beta_xy == 0, params=params,
                   reference_q=ReferenceQ.iid('exponential', proposal_scale,
                                              1),
                   metadata=metadata)


@timeit
def gen_conditional_dep(params):
    """X and Y dependent given Z while the do-null holds.

    X, Z ~ N(0, 1) independent and Y = b2 * inv_Phi(frac(Phi(Z) + Phi(X)))
    + |b1| * eps with (b1, b2) = (beta_yz, beta_yz_2). For every fixed x the
    fractional part is Uniform(0, 1) over Z, so p(y | do(x)) = p(y); for
    fixed Z, Y is a function of X. The true weights are 1.
    """
    _require_univariate(params, 'conditional dependence')
    rng = np.random.default_rng(params.seed)
    n = params.n
    x = rng.standard_normal(n)
    z = rng.standard_normal(n)
    level = np.mod(stats.norm.cdf(z) + stats.norm.cdf(x), 1.0)
    level = np.clip(level, 1e-12, 1 - 1e-12)
    y = params.beta_yz_2 * stats.norm.ppf(level) \
        + abs(params.beta_yz) * rng.standard_normal(n)
    return Dataset(x, y, z, true_weights=np.ones(n), ground_truth_null=True,
                   params=params,
                   reference_q=ReferenceQ.iid('gaussian', 1.0, 1))


@timeit
def gen_factorized_null(params):
    """X ~ N(0, I) independent of (Y, Z): an exact do-null, weights 1.

    (Y, Z) follow the coupling of ``gen_continuous``.
    """
    rng = np.random.default_rng(params.seed)
    x = rng.standard_normal((params.n, params.d_x))
    y, z = draw_coupled(params, params.n, rng)
    return Dataset(x, y, z, true_weights=np.ones(params.n),
                   ground_truth_null=True, params=params,
                   reference_q=ReferenceQ.iid('gaussian', 1.0, params.d_x))


GENERATORS = {
    'binary': gen_binary,
    'continuous': gen_continuous,
    'mixed': gen_mixed,
    'exponential_marginal': gen_exponential_marginal,
    'conditional_dep': gen_conditional_dep,
    'factorized_null': gen_factorized_null,
}


def generate(name, params):
    """Run the generator called ``name``.

    Raises:
        ConfigError: unknown generator.
    """
    try:
        generator = GENERATORS[name]
    except KeyError:
        raise ConfigError(f'unknown generator {name!r}; expected one of '
                          f'{sorted(GENERATORS)}')
    return generator(params)
