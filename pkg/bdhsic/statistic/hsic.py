# -*- coding: utf-8 -*-
"""HSIC estimators and importance-weight diagnostics.

``hsic_biased`` is the classical biased estimator of the Hilbert-Schmidt
independence criterion. ``bd_hsic_statistic`` is its backdoor-adjusted
version: the squared Hilbert-Schmidt norm of the weighted cross-covariance
operator, written with the matrices

* K   (n x n)   kernel on the test-half treatments x,
* L   (n x n)   kernel on the test-half outcomes y,
* Kq  (n x m)   kernel between x and the q-samples x^q,
* KQ  (m x m)   kernel on the q-samples,
* w   (n,)      importance weights q(x_i) / p(x_i | z_i).

With unit weights and x^q = x the two estimators coincide.
"""

from dataclasses import dataclass, field

import numpy as np

from bdhsic.errors import DimensionError, DomainError, NonFiniteError


def as_weights(weights, length=None):
    """Validate a weight vector.

    Args:
        weights (array-like): candidate weights.
        length (int): expected length, if known.

    Returns:
        numpy.ndarray: 1-D float array of finite non-negative weights.

    Raises:
        DimensionError: not 1-D or wrong length.
        NonFiniteError: NaN or infinite entries.
        DomainError: negative entries.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1:
        raise DimensionError('weights must be a 1-D vector')
    if length is not None and weights.shape[0] != length:
        raise DimensionError(
            f'expected {length} weights, got {weights.shape[0]}')
    if not np.all(np.isfinite(weights)):
        raise NonFiniteError('weights contain non-finite entries')
    if np.any(weights < 0):
        raise DomainError('weights must be non-negative')
    return weights


def _entries(matrix):
    """Accept either a GramMatrix or a plain array."""
    return np.asarray(getattr(matrix, 'entries', matrix), dtype=float)


@dataclass(frozen=True)
class StatisticInputs:
    """Everything ``bd_hsic_statistic`` needs, already on the test half.

    Plain arrays or ``GramMatrix`` objects are accepted; both are stored as
    arrays.
    """

    K: np.ndarray
    L: np.ndarray
    Kq: np.ndarray
    KQ: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        for name in ('K', 'L', 'Kq', 'KQ'):
            object.__setattr__(self, name, _entries(getattr(self, name)))
        n = self.K.shape[0]
        m = self.KQ.shape[0]
        if self.K.shape != (n, n) or self.L.shape != (n, n):
            raise DimensionError('K and L must both be n x n')
        if self.KQ.shape != (m, m):
            raise DimensionError('KQ must be square')
        if self.Kq.shape != (n, m):
            raise DimensionError(
                f'Kq must be {n} x {m}, got {self.Kq.shape}')
        object.__setattr__(self, 'w', as_weights(self.w, n))

    @property
    def n(self):
        return self.K.shape[0]

    @property
    def m(self):
        return self.KQ.shape[0]


@dataclass
class TestResult:
    """Outcome of one permutation test.

    Attributes:
        statistic (float): observed statistic on the test half.
        null_sample (numpy.ndarray): statistics under permuted outcomes.
        p_value (float): two-sided permutation p-value.
        ess (float): effective sample size of the weights used.
        n_test (int): number of test-half rows.
        diagnostics (dict): estimator and q-policy details.
    """

    __test__ = False

    statistic: float
    null_sample: np.ndarray
    p_value: float
    ess: float
    n_test: int
    diagnostics: dict = field(default_factory=dict)

    def to_record(self):
        """Return a JSON-serialisable dict of the result."""
        return {
            'statistic': float(self.statistic),
            'p_value': float(self.p_value),
            'ess': float(self.ess),
            'n_test': int(self.n_test),
            'null_sample': [float(value) for value in self.null_sample],
            'diagnostics': self.diagnostics,
        }


def hsic_biased(K, L):
    """Biased HSIC estimator.

    (1/n^2) sum_ij K_ij L_ij + (1/n^4) K_++ L_++ - (2/n^3) sum_ijr K_ij L_ir

    Args:
        K (GramMatrix or array): n x n kernel on x.
        L (GramMatrix or array): n x n kernel on y.

    Returns:
        float: the estimate.

    Raises:
        DimensionError: non-square or differently sized matrices.
    """
    K = _entries(K)
    L = _entries(L)
    n = K.shape[0]
    if K.shape != (n, n) or L.shape != (n, n):
        raise DimensionError('K and L must be square and of the same size')
    first = np.sum(K * L) / n ** 2
    second = K.sum() * L.sum() / n ** 4
    third = 2.0 * np.dot(K.sum(axis=1), L.sum(axis=1)) / n ** 3
    return float(first + second - third)


def weighted_terms(inputs, L=None):
    """The three terms of the weighted statistic.

    Args:
        inputs (StatisticInputs): matrices and weights.
        L (numpy.ndarray): outcome kernel to use instead of ``inputs.L``;
            the permutation null passes permuted copies here.

    Returns:
        tuple: (first, second, third) with statistic = first + second - third.
    """
    L = inputs.L if L is None else L
    n, m = inputs.n, inputs.m
    w = inputs.w
    lw = L @ w
    first = w @ (inputs.K * L) @ w / n ** 2
    second = inputs.KQ.sum() * (w @ lw) / (m ** 2 * n ** 2)
    third = 2.0 * np.dot(inputs.Kq.sum(axis=1) * w, lw) / (n ** 2 * m)
    return first, second, third


def bd_hsic_statistic(inputs):
    """Backdoor-adjusted HSIC statistic.

    ||C_q*||^2 = (1/n^2) w'(K o L)w + (1/(m^2 n^2)) KQ_++ (w'Lw)
                 - (2/(n^2 m)) w'(Kq 1_m o L w)

    The value is not clamped at zero; it can be slightly negative through
    round-off.

    Args:
        inputs (StatisticInputs): test-half matrices and weights.

    Returns:
        float: the statistic.
    """
    first, second, third = weighted_terms(inputs)
    return float(first + second - third)


def ess(weights):
    """Effective sample size (sum w)^2 / sum w^2.

    Args:
        weights (array-like): non-negative weights, at least one positive.

    Returns:
        float: value in [1, len(weights)].

    Raises:
        DomainError: every weight is zero.
    """
    weights = as_weights(weights)
    squares = np.sum(weights ** 2)
    if squares == 0:
        raise DomainError('effective sample size of all-zero weights')
    return float(np.sum(weights) ** 2 / squares)
