# -*- coding: utf-8 -*-
"""Choice of the scaling c_q of the q marginal.

For Gaussian treatments the effective sample size of the weights
q(x) / p(x | z) is maximised by shrinking q relative to p. With one
treatment and one confounder of correlation rho the optimal standard
deviation scale is sqrt(1 - 2 rho^2). With p treatments and q confounders
the optimum of

    |T|^2 det(D) det(2 T^-1 - (I_p - S_xz S_zx)^-1 - B D^-1 B')

over T = c I_p is found by gradient ascent on log c, where S_xz is the
cross-covariance of the standardised blocks,
B = (I_p - S_xz S_zx)^-1 S_xz and D = I_q - S_zx (I_p - S_xz S_zx)^-1 S_xz.
T is a covariance, so samples are scaled by sqrt(c).
"""

import logging
from dataclasses import dataclass

import numpy as np

from bdhsic.errors import DimensionError, DomainError
from bdhsic.q_marginal.sampling import QMode, QSpec

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

MAX_ITERATIONS = 500
RELATIVE_TOLERANCE = 1e-9
STEP_SIZE = 0.1


@dataclass(frozen=True)
class CovBlocks:
    """Cross-covariance of standardised treatments and confounders.

    Args:
        sigma_xz (numpy.ndarray): p x q cross-covariance matrix.
    """

    sigma_xz: np.ndarray

    def __post_init__(self):
        sigma_xz = np.atleast_2d(np.asarray(self.sigma_xz, dtype=float))
        if sigma_xz.ndim != 2:
            raise DimensionError('sigma_xz must be a matrix')
        object.__setattr__(self, 'sigma_xz', sigma_xz)

    @property
    def p(self):
        return self.sigma_xz.shape[0]

    @property
    def q(self):
        return self.sigma_xz.shape[1]

    def schur_parts(self):
        """Return (A, B, D, M) with M = A + B D^-1 B'.

        Raises:
            DomainError: I_p - S_xz S_zx or D is not positive definite.
        """
        sigma_xz = self.sigma_xz
        inner = np.eye(self.p) - sigma_xz @ sigma_xz.T
        _require_pd(inner, 'I_p - S_xz S_zx')
        a_matrix = np.linalg.inv(inner)
        b_matrix = a_matrix @ sigma_xz
        d_matrix = np.eye(self.q) - sigma_xz.T @ a_matrix @ sigma_xz
        _require_pd(d_matrix, 'D')
        m_matrix = a_matrix + b_matrix @ np.linalg.solve(d_matrix,
                                                         b_matrix.T)
        m_matrix = 0.5 * (m_matrix + m_matrix.T)
        return a_matrix, b_matrix, d_matrix, m_matrix


def _require_pd(matrix, name):
    try:
        np.linalg.cholesky(0.5 * (matrix + matrix.T))
    except np.linalg.LinAlgError:
        raise DomainError(f'{name} is not positive definite')


def estimate_blocks(x, z):
    """Cross-covariance of the column-standardised blocks.

    Constant columns are centred but not rescaled.

    Args:
        x (array-like): n x p treatments.
        z (array-like): n x q confounders.

    Returns:
        CovBlocks: the estimated blocks.
    """
    x = _standardise(x)
    z = _standardise(z)
    if x.shape[0] != z.shape[0]:
        raise DimensionError('x and z must have the same number of rows')
    return CovBlocks(x.T @ z / x.shape[0])


def _standardise(values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    centred = values - values.mean(axis=0)
    scale = centred.std(axis=0)
    scale[scale == 0] = 1.0
    return centred / scale


def optimal_cq_univariate(rho):
    """Optimal q scaling for one Gaussian treatment and one confounder.

    Args:
        rho (float): treatment-confounder correlation.

    Returns:
        float: sqrt(1 - 2 rho^2).

    Raises:
        DomainError: rho^2 >= 1/2.
    """
    radicand = 1.0 - 2.0 * float(rho) ** 2
    if radicand <= 0:
        raise DomainError(f'no admissible c_q for rho = {rho}')
    return float(np.sqrt(radicand))


def multivariate_objective(T, blocks):
    """|T|^2 det(D) det(2 T^-1 - (I_p - S_xz S_zx)^-1 - B D^-1 B').

    Args:
        T (array-like): p x p positive definite matrix.
        blocks (CovBlocks): cross-covariance blocks.

    Returns:
        float: the objective.

    Raises:
        DimensionError: T is not p x p.
        DomainError: T or the inner matrix is not positive definite.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape != (blocks.p, blocks.p):
        raise DimensionError(f'T must be {blocks.p} x {blocks.p}')
    _require_pd(T, 'T')
    _, _, d_matrix, m_matrix = blocks.schur_parts()
    inner = 2.0 * np.linalg.inv(T) - m_matrix
    _require_pd(inner, '2 T^-1 - (I_p - S_xz S_zx)^-1 - B D^-1 B\'')
    return float(np.linalg.det(T) ** 2 * np.linalg.det(d_matrix)
                 * np.linalg.det(inner))


def _log_objective(log_c, p, log_det_d, eigenvalues):
    """Log objective at T = exp(log_c) I_p, or None outside the domain."""
    gaps = 2.0 * np.exp(-log_c) - eigenvalues
    if np.any(gaps <= 0):
        return None
    return 2.0 * p * log_c + log_det_d + float(np.sum(np.log(gaps)))


def _log_gradient(log_c, p, eigenvalues):
    inverse_c = np.exp(-log_c)
    return 2.0 * p - 2.0 * inverse_c * float(
        np.sum(1.0 / (2.0 * inverse_c - eigenvalues)))


def optimal_cq_multivariate(blocks, seed=0, max_iterations=MAX_ITERATIONS,
                            tolerance=RELATIVE_TOLERANCE):
    """Maximise the objective over T = c I_p and return sqrt(c).

    The ascent runs on s = log c with a fixed step that is halved whenever a
    step would leave the domain or decrease the objective. It stops when the
    relative change of the objective drops below ``tolerance`` or after
    ``max_iterations`` steps.

    Args:
        blocks (CovBlocks): cross-covariance blocks.
        seed (int): seeds a small jitter of the starting point.
        max_iterations (int): iteration cap.
        tolerance (float): relative convergence threshold.

    Returns:
        float: the sample scaling factor sqrt(c).

    Raises:
        DomainError: the objective domain is empty.
    """
    _, _, d_matrix, m_matrix = blocks.schur_parts()
    p = blocks.p
    eigenvalues = np.linalg.eigvalsh(m_matrix)
    log_det_d = float(np.linalg.slogdet(d_matrix)[1])
    # start strictly inside the domain c < 2 / max eigenvalue
    jitter = np.random.default_rng(seed).uniform(-0.01, 0.0)
    log_c = -np.log(eigenvalues.max()) + jitter
    current = _log_objective(log_c, p, log_det_d, eigenvalues)
    if current is None:
        raise DomainError('empty domain for the c_q objective')

    step = STEP_SIZE
    for iteration in range(max_iterations):
        gradient = _log_gradient(log_c, p, eigenvalues)
        while True:
            candidate = log_c + step * gradient
            value = _log_objective(candidate, p, log_det_d, eigenvalues)
            if value is not None and value >= current:
                break
            step *= 0.5
            if step < 1e-12:
                value = None
                break
        if value is None:
            break
        change = abs(np.exp(value - current) - 1.0)
        log_c, current = candidate, value
        if change < tolerance:
            break
    LOGGER.debug('c_q ascent stopped after %s iterations', iteration + 1)
    return float(np.sqrt(np.exp(log_c)))


def select_q(x, z, seed=0):
    """Resolve the automatic q policy from training-half data.

    One treatment and one confounder use the closed form, larger blocks the
    multivariate ascent. When no admissible scaling exists the policy falls
    back to resampling the observed treatments (q = p).

    Args:
        x (array-like): training-half treatments.
        z (array-like): training-half confounders.
        seed (int): seed of the returned QSpec.

    Returns:
        QSpec: a ``scale`` spec with the chosen c_q, or a ``resample`` spec.
    """
    blocks = estimate_blocks(x, z)
    try:
        if blocks.p == 1 and blocks.q == 1:
            c_q = optimal_cq_univariate(blocks.sigma_xz[0, 0])
        else:
            c_q = optimal_cq_multivariate(blocks, seed=seed)
    except DomainError as domain_error:
        LOGGER.warning('falling back to q = p: %s', domain_error)
        return QSpec(QMode.RESAMPLE, seed=seed)
    LOGGER.info('selected c_q = %.5f', c_q)
    return QSpec(QMode.SCALE, c_q=c_q, seed=seed)
