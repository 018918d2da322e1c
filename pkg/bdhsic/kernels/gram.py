# -*- coding: utf-8 -*-
"""Kernel specifications, bandwidth selection and Gram matrices.

Every statistic in bdhsic is assembled from Gram matrices produced here. Two
kernel families are supported:

* ``rbf``: k(a, b) = exp(-||a - b||^2 / (2 sigma^2)). The length-scale sigma
  is either given explicitly or chosen per variable block with the median
  heuristic.
* ``linear``: k(a, b) = <a, b>. The bandwidth is ignored.

Entries are computed independently of each other (no running reductions), so
the result does not depend on how the work is split.
"""

import enum
from dataclasses import dataclass

import numpy as np

from scipy.spatial.distance import cdist, pdist

from bdhsic.errors import ConfigError, DimensionError, DomainError, \
    NonFiniteError

MEDIAN_HEURISTIC = 'median-heuristic'
FALLBACK_BANDWIDTH = 1.0
MEDIAN_MAX_POINTS = 5000


class KernelFamily(enum.Enum):
    """Supported kernel families."""

    RBF = 'rbf'
    LINEAR = 'linear'


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth.

    Args:
        family (KernelFamily or str): ``rbf`` or ``linear``.
        bandwidth (float or str): RBF length-scale sigma, or the sentinel
            ``'median-heuristic'`` to choose it from the data.
    """

    family: KernelFamily = KernelFamily.RBF
    bandwidth: object = MEDIAN_HEURISTIC

    def __post_init__(self):
        try:
            object.__setattr__(self, 'family', KernelFamily(self.family))
        except ValueError:
            raise ConfigError(f'unknown kernel family {self.family!r}')
        if self.bandwidth == MEDIAN_HEURISTIC:
            return
        try:
            bandwidth = float(self.bandwidth)
        except (TypeError, ValueError):
            raise ConfigError(f'invalid bandwidth {self.bandwidth!r}')
        if not np.isfinite(bandwidth) or bandwidth <= 0:
            raise ConfigError(f'bandwidth must be positive, got {bandwidth}')
        object.__setattr__(self, 'bandwidth', bandwidth)

    @property
    def is_adaptive(self):
        """True when the bandwidth still has to be chosen from data."""
        return (self.family is KernelFamily.RBF
                and self.bandwidth == MEDIAN_HEURISTIC)

    def resolve(self, points, seed=0):
        """Return a copy with an explicit bandwidth.

        Linear kernels and explicit bandwidths are returned unchanged.

        Args:
            points (array-like): n x d sample used by the median heuristic.
            seed (int): seed for the subsample drawn when n > 5000.

        Returns:
            KernelSpec: spec with a numeric bandwidth.
        """
        if not self.is_adaptive:
            return self
        return KernelSpec(self.family, median_heuristic(points, seed=seed))


@dataclass(frozen=True)
class GramMatrix:
    """An n x m matrix of kernel evaluations and the spec that produced it."""

    entries: np.ndarray
    spec: KernelSpec

    @property
    def shape(self):
        return self.entries.shape


def as_points(values, name='points'):
    """Return ``values`` as a finite 2-D float array (column vector if 1-D)."""
    points = np.asarray(values, dtype=float)
    if points.ndim == 1:
        points = points[:, np.newaxis]
    if points.ndim != 2:
        raise DimensionError(f'{name} must be a 1-D or 2-D array')
    if points.shape[0] == 0 or points.shape[1] == 0:
        raise DimensionError(f'{name} must be non-empty')
    if not np.all(np.isfinite(points)):
        raise NonFiniteError(f'{name} contains non-finite entries')
    return points


def gram(a_points, b_points, spec):
    """Evaluate the kernel between every row of A and every row of B.

    Args:
        a_points (array-like): n x d point set.
        b_points (array-like): m x d point set.
        spec (KernelSpec): kernel to evaluate. An adaptive RBF spec is
            resolved on ``a_points``.

    Returns:
        GramMatrix: entries[i, j] = k(a_i, b_j).

    Raises:
        DimensionError: empty inputs or different column dimension.
        NonFiniteError: NaN or infinite inputs.
        DomainError: non-positive bandwidth.
    """
    a_points = as_points(a_points, 'A')
    b_points = as_points(b_points, 'B')
    if a_points.shape[1] != b_points.shape[1]:
        raise DimensionError(
            f'column dimensions differ: {a_points.shape[1]} != '
            f'{b_points.shape[1]}')
    spec = spec.resolve(a_points)

    if spec.family is KernelFamily.LINEAR:
        entries = a_points @ b_points.T
    else:
        sigma = float(spec.bandwidth)
        if sigma <= 0:
            raise DomainError(f'bandwidth must be positive, got {sigma}')
        # cdist evaluates d(a_i, b_j) entry by entry, so gram(A, A) is
        # exactly symmetric.
        sq_dists = cdist(a_points, b_points, metric='sqeuclidean')
        entries = np.exp(-sq_dists / (2.0 * sigma ** 2))
    return GramMatrix(entries, spec)


def median_heuristic(points, seed=0, max_points=MEDIAN_MAX_POINTS):
    """Median of the non-zero pairwise Euclidean distances.

    For more than ``max_points`` rows, a seeded subsample without
    replacement of ``max_points`` rows is used.

    Args:
        points (array-like): n x d point set, n >= 2.
        seed (int): subsampling seed.
        max_points (int): subsample size cap.

    Returns:
        float: the median distance, or 1.0 if every distance is zero.

    Raises:
        DimensionError: fewer than two points.
    """
    points = as_points(points)
    if points.shape[0] < 2:
        raise DimensionError('median heuristic needs at least two points')
    if points.shape[0] > max_points:
        # canonical row order first, so the subsample ignores input order
        points = points[np.lexsort(points.T[::-1])]
        rng = np.random.default_rng(seed)
        rows = np.sort(rng.choice(points.shape[0], size=max_points,
                                  replace=False))
        points = points[rows]
    distances = pdist(points, metric='euclidean')
    distances = distances[distances > 0]
    if distances.size == 0:
        return FALLBACK_BANDWIDTH
    return float(np.median(distances))
