# -*- coding: utf-8 -*-
"""Generator parameters and generated datasets.

A ``Dataset`` holds the treatments X, outcomes Y and confounders Z of one
simulated sample together with the weights the generator knows to be true,
q(x) / p(x | z), and the distribution q they refer to.

Datasets are exported as a delimited text file with header columns
x_1..x_dx, y_1..y_dy, z_1..z_dz and w_true, plus a JSON sidecar holding the
generator parameters and the ground truth.
"""

import enum
import json
import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from bdhsic.errors import ConfigError, DataError
from bdhsic.q_marginal.sampling import ReferenceQ

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)


class Dependence(enum.Enum):
    """Shape of the X -> Y dependence, or a special-purpose dataset."""

    LINEAR = 'linear'
    QUADRATIC = 'quadratic'
    COSINE = 'cosine'
    EXPONENTIAL_MARGINAL = 'exponential_marginal'
    CONDITIONAL_DEP = 'conditional_dep'


@dataclass(frozen=True)
class GenParams:
    """Parameters shared by every generator.

    Args:
        n (int): number of rows.
        beta_xy (float): strength of the X -> Y dependence.
        beta_xz (float): strength of the Z -> X confounding.
        beta_yz (float): strength of the Z - Y coupling.
        theta (float): proposal variance factor; tau^2 for the binary
            generator.
        phi (float): conditional variance of X given Z.
        d_x (int): treatment columns.
        d_y (int): outcome columns.
        d_z (int): confounder columns.
        dependence (Dependence or str): shape of the X -> Y dependence.
        seed (int): generator seed.
        alternative (bool): binary generator branch; False gives H0.
        beta_yz_2 (float): second coupling of the conditional dependence
            dataset.
    """

    n: int = 1000
    beta_xy: float = 0.0
    beta_xz: float = 0.75
    beta_yz: float = 0.5
    theta: float = 2.0
    phi: float = 2.0
    d_x: int = 1
    d_y: int = 1
    d_z: int = 1
    dependence: Dependence = Dependence.LINEAR
    seed: int = 0
    alternative: bool = True
    beta_yz_2: float = 0.0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'dependence',
                               Dependence(self.dependence))
        except ValueError:
            raise ConfigError(f'unknown dependence {self.dependence!r}')
        if self.n < 1:
            raise ConfigError('n must be at least 1')
        if min(self.d_x, self.d_y, self.d_z) < 1:
            raise ConfigError('dimensions must be at least 1')
        if not (self.theta > 0 and self.phi > 0):
            raise ConfigError('theta and phi must be positive')

    def replace(self, **changes):
        """Copy with some fields changed."""
        values = asdict(self)
        values.update(changes)
        return GenParams(**values)

    def to_dict(self):
        values = asdict(self)
        values['dependence'] = self.dependence.value
        return values

    @classmethod
    def from_dict(cls, values):
        try:
            return cls(**values)
        except TypeError as error:
            raise ConfigError(f'invalid generator parameters: {error}')


@dataclass
class Dataset:
    """One simulated sample.

    Args:
        x (numpy.ndarray): n x d_x treatments.
        y (numpy.ndarray): n x d_y outcomes.
        z (numpy.ndarray): n x d_z confounders.
        true_weights (numpy.ndarray): q(x) / p(x | z) per row, or None.
        ground_truth_null (bool): whether p(y | do(x)) = p(y) holds; None
            when unknown.
        params (GenParams): parameters of the generator.
        x_kinds (tuple): ``continuous`` or ``binary`` per treatment column.
        reference_q (ReferenceQ): the q of ``true_weights``.
        metadata (dict): generator diagnostics.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    true_weights: np.ndarray = None
    ground_truth_null: bool = None
    params: GenParams = None
    x_kinds: tuple = None
    reference_q: ReferenceQ = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x, self.y, self.z = (_as_matrix(self.x, 'x'),
                                  _as_matrix(self.y, 'y'),
                                  _as_matrix(self.z, 'z'))
        n = self.x.shape[0]
        if self.y.shape[0] != n or self.z.shape[0] != n:
            raise DataError('x, y and z must have the same number of rows')
        if self.true_weights is not None:
            self.true_weights = np.asarray(self.true_weights, dtype=float)
            if self.true_weights.shape != (n,):
                raise DataError('one true weight per row is required')
            if not np.all(np.isfinite(self.true_weights)) \
                    or np.any(self.true_weights <= 0):
                raise DataError('true weights must be finite and positive')
        if self.x_kinds is None:
            self.x_kinds = ('continuous',) * self.x.shape[1]
        self.x_kinds = tuple(self.x_kinds)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def is_mixed(self):
        return len(set(self.x_kinds)) > 1

    @property
    def is_categorical(self):
        return all(kind != 'continuous' for kind in self.x_kinds)

    def columns(self):
        """Header names x_1..x_dx, y_1..y_dy, z_1..z_dz."""
        return ([f'x_{i + 1}' for i in range(self.x.shape[1])]
                + [f'y_{i + 1}' for i in range(self.y.shape[1])]
                + [f'z_{i + 1}' for i in range(self.z.shape[1])])

    def to_frame(self):
        """The rows as a DataFrame, with w_true when known."""
        frame = pd.DataFrame(np.hstack([self.x, self.y, self.z]),
                             columns=self.columns())
        if self.true_weights is not None:
            frame['w_true'] = self.true_weights
        return frame

    def sidecar(self):
        """JSON-ready description of everything but the rows."""
        return {
            'params': None if self.params is None else self.params.to_dict(),
            'ground_truth_null': None if self.ground_truth_null is None
            else bool(self.ground_truth_null),
            'x_kinds': list(self.x_kinds),
            'reference_q': None if self.reference_q is None
            else self.reference_q.to_dict(),
            'metadata': self.metadata,
        }

    def save(self, path, sep=',', encoding='utf-8'):
        """Write the rows to ``path`` and the sidecar next to it.

        Returns:
            str: the sidecar path.
        """
        self.to_frame().to_csv(path, sep=sep, index=False, encoding=encoding,
                               float_format='%.17g')
        sidecar_path = sidecar_path_for(path)
        with open(sidecar_path, 'w', encoding=encoding) as handle:
            json.dump(self.sidecar(), handle, indent=2)
        LOGGER.info('dataset of %s rows written to %s', self.n, path)
        return sidecar_path

    @classmethod
    def load(cls, path, sep=',', encoding='utf-8'):
        """Read a dataset written by ``save``.

        The sidecar is optional; without it the ground truth is unknown and
        reported as null.

        Raises:
            DataError: missing x, y or z columns.
        """
        frame = pd.read_csv(path, sep=sep, encoding=encoding,
                            float_precision='round_trip')
        blocks = {}
        for prefix in ('x', 'y', 'z'):
            names = sorted((c for c in frame.columns
                            if c.startswith(f'{prefix}_')),
                           key=lambda name: int(name.split('_')[1]))
            if not names:
                raise DataError(f'{path} has no {prefix}_ columns')
            blocks[prefix] = frame[names].to_numpy(dtype=float)
        weights = frame['w_true'].to_numpy(dtype=float) \
            if 'w_true' in frame.columns else None

        sidecar = {}
        if os.path.exists(sidecar_path_for(path)):
            with open(sidecar_path_for(path), encoding=encoding) as handle:
                sidecar = json.load(handle)
        params = sidecar.get('params')
        reference = sidecar.get('reference_q')
        return cls(blocks['x'], blocks['y'], blocks['z'],
                   true_weights=weights,
                   ground_truth_null=sidecar.get('ground_truth_null'),
                   params=GenParams.from_dict(params) if params else None,
                   x_kinds=sidecar.get('x_kinds'),
                   reference_q=ReferenceQ.from_dict(reference)
                   if reference else None,
                   metadata=sidecar.get('metadata', {}))


def sidecar_path_for(path):
    """``data.csv`` -> ``data.json``."""
    return os.path.splitext(path)[0] + '.json'


def _as_matrix(values, name):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if values.ndim != 2:
        raise DataError(f'{name} must be a matrix')
    return values
