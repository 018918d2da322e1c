# -*- coding: utf-8 -*-
"""Samples from the q marginal of the treatments.

Four modes are supported:

* ``resample``: q = p, rows of X drawn with replacement;
* ``identity``: x^q is X itself, row for row;
* ``scale``: rows drawn with replacement and multiplied by c_q;
* ``reference``: draws from a known distribution, the numerator of a
  generator's true weights.

Outside ``identity`` mode the draws are independent of the row order of X,
so x^q is independent of the paired (x, y, z) rows. ``identity`` makes
K^q = K^Q = K, which turns the weighted statistic with unit weights into
plain HSIC.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from bdhsic.errors import ConfigError, DimensionError

REFERENCE_FAMILIES = ('gaussian', 'exponential', 'bernoulli')


class QMode(enum.Enum):
    """How x^q is produced."""

    RESAMPLE = 'resample'
    SCALE = 'scale'
    REFERENCE = 'reference'
    IDENTITY = 'identity'


@dataclass(frozen=True)
class ReferenceQ:
    """Product distribution with one independent factor per column.

    Each factor is ``(family, parameter)``: ``('gaussian', std)``,
    ``('exponential', scale)`` or ``('bernoulli', p)``.
    """

    columns: tuple

    def __post_init__(self):
        columns = tuple((str(family), float(parameter))
                        for family, parameter in self.columns)
        for family, parameter in columns:
            if family not in REFERENCE_FAMILIES:
                raise ConfigError(f'unknown reference family {family!r}')
            if parameter <= 0:
                raise ConfigError(f'{family} parameter must be positive')
        object.__setattr__(self, 'columns', columns)

    @classmethod
    def iid(cls, family, parameter, d):
        return cls(tuple((family, parameter) for _ in range(d)))

    def sample(self, n, rng):
        """Draw an n x d matrix."""
        draws = np.empty((n, len(self.columns)))
        for column, (family, parameter) in enumerate(self.columns):
            if family == 'gaussian':
                draws[:, column] = rng.normal(0.0, parameter, size=n)
            elif family == 'exponential':
                draws[:, column] = rng.exponential(parameter, size=n)
            else:
                draws[:, column] = rng.binomial(1, parameter, size=n)
        return draws

    def to_dict(self):
        return {'columns': [list(column) for column in self.columns]}

    @classmethod
    def from_dict(cls, document):
        return cls(tuple(tuple(column) for column in document['columns']))


@dataclass(frozen=True)
class QSpec:
    """q-marginal policy.

    Args:
        mode (QMode or str): ``resample``, ``scale``, ``reference`` or
            ``identity``.
        c_q (float): scaling factor, required in ``scale`` mode.
        seed (int): seed of the draws.
        reference (ReferenceQ): distribution for ``reference`` mode.
    """

    mode: QMode = QMode.RESAMPLE
    c_q: float = 1.0
    seed: int = 0
    reference: ReferenceQ = field(default=None)

    def __post_init__(self):
        try:
            object.__setattr__(self, 'mode', QMode(self.mode))
        except ValueError:
            raise ConfigError(f'unknown q mode {self.mode!r}')
        if self.mode is QMode.SCALE and not float(self.c_q) > 0:
            raise ConfigError(f'c_q must be positive, got {self.c_q}')
        if self.mode is QMode.REFERENCE and self.reference is None:
            raise ConfigError('reference mode needs a reference distribution')

    def describe(self):
        """Short dict for diagnostics."""
        description = {'q_mode': self.mode.value}
        if self.mode is QMode.SCALE:
            description['c_q'] = float(self.c_q)
        return description


def sample_q(x, spec, rows=None):
    """Draw one q-sample per row of X.

    Args:
        x (array-like): n x p observed treatments.
        spec (QSpec): q policy.
        rows (array-like): row indices to use instead of a seeded
            with-replacement resample (ignored in reference mode).

    Returns:
        numpy.ndarray: n x p matrix of q-samples.

    Raises:
        DimensionError: empty X, or a reference of the wrong width.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    n = x.shape[0]
    if n == 0:
        raise DimensionError('cannot sample q from an empty treatment matrix')
    rng = np.random.default_rng(spec.seed)

    if spec.mode is QMode.REFERENCE:
        if len(spec.reference.columns) != x.shape[1]:
            raise DimensionError('reference q width differs from X')
        return spec.reference.sample(n, rng)
    if spec.mode is QMode.IDENTITY:
        return x.copy()

    if rows is None:
        rows = rng.integers(0, n, size=n)
    resampled = x[np.asarray(rows)]
    if spec.mode is QMode.SCALE:
        return spec.c_q * resampled
    return resampled.copy()
