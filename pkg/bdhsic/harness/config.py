# -*- coding: utf-8 -*-
"""Test and experiment configuration.

``TestConfig`` gathers the inputs of one test: kernels, estimator, q policy,
number of permutations, seed and scorer settings. ``ExperimentConfig`` adds
the generator sweep, the number of replicates and the level.

Experiment files are JSON documents::

    {
      "generator": "continuous",
      "params": {"n": 1000, "beta_xz": 0.75},
      "sweep": {"beta_xy": [0.0, 0.02]},
      "test": {"estimator": "true_weights", "n_q": 250},
      "replicates": 100,
      "alpha": 0.05
    }

Unknown keys are rejected at every level.
"""

import enum
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace

from bdhsic.errors import ConfigError
from bdhsic.kernels.gram import KernelSpec
from bdhsic.q_marginal.sampling import QSpec
from bdhsic.ratio_estimation.nce import DEFAULT_BRIDGES
from bdhsic.ratio_estimation.scorer import ScorerSpec
from bdhsic.simgen.dataset import GenParams
from bdhsic.simgen.generators import GENERATORS
from bdhsic.statistic.permutation import DEFAULT_PERMUTATIONS

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

AUTO_Q = 'auto'
DEFAULT_ALPHA = 0.05


class Estimator(enum.Enum):
    """Source of the importance weights."""

    TRUE_WEIGHTS = 'true_weights'
    CATEGORICAL = 'categorical'
    NCEQ = 'nce_q'
    TREQ = 'tre_q'
    MIXED_PRODUCT = 'mixed_product'
    UNIFORM_BASELINE = 'uniform_baseline'
    UNIT_WEIGHTS = 'unit_weights'


class Procedure(enum.Enum):
    """Test run on every replicate of an experiment."""

    BD_HSIC = 'bd_hsic'
    MARGINAL_HSIC = 'marginal_hsic'


def _check_keys(document, allowed, where):
    if not isinstance(document, dict):
        raise ConfigError(f'{where} must be a JSON object')
    unknown = sorted(set(document) - set(allowed))
    if unknown:
        raise ConfigError(f'unknown keys in {where}: {", ".join(unknown)}')


def _kernel_from_dict(document, where):
    if isinstance(document, str):
        return KernelSpec(document)
    _check_keys(document, ('family', 'bandwidth'), where)
    return KernelSpec(**document)


def _kernel_to_dict(spec):
    return {'family': spec.family.value, 'bandwidth': spec.bandwidth}


@dataclass(frozen=True)
class TestConfig:
    """Inputs of one bd-HSIC test.

    Args:
        kernel_x (KernelSpec): kernel on the treatments.
        kernel_y (KernelSpec): kernel on the outcomes.
        estimator (Estimator or str): source of the weights.
        q (QSpec or str): ``'auto'`` to choose q from the training half, or
            a fixed QSpec; ignored for the true weights.
        n_q (int): number of permutations.
        seed (int): root seed; every random choice of the test derives
            from it.
        scorer (ScorerSpec): scorer settings of the NCE-q and TRE-q
            estimators.
        bridges (int): number of TRE-q bridges.
    """

    __test__ = False

    kernel_x: KernelSpec = field(default_factory=KernelSpec)
    kernel_y: KernelSpec = field(default_factory=KernelSpec)
    estimator: Estimator = Estimator.TRUE_WEIGHTS
    q: object = AUTO_Q
    n_q: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    scorer: ScorerSpec = field(default_factory=ScorerSpec)
    bridges: int = DEFAULT_BRIDGES

    def __post_init__(self):
        try:
            object.__setattr__(self, 'estimator', Estimator(self.estimator))
        except ValueError:
            raise ConfigError(f'unknown estimator {self.estimator!r}')
        if self.q != AUTO_Q and not isinstance(self.q, QSpec):
            raise ConfigError(f'q must be {AUTO_Q!r} or a QSpec')
        if int(self.n_q) < 1:
            raise ConfigError(f'n_q must be at least 1, got {self.n_q}')
        if int(self.bridges) < 1:
            raise ConfigError('at least one bridge is required')

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def to_dict(self):
        document = {
            'kernel_x': _kernel_to_dict(self.kernel_x),
            'kernel_y': _kernel_to_dict(self.kernel_y),
            'estimator': self.estimator.value,
            'n_q': int(self.n_q),
            'seed': int(self.seed),
            'scorer': asdict(self.scorer),
            'bridges': int(self.bridges),
        }
        if self.q == AUTO_Q:
            document['q'] = AUTO_Q
        else:
            document['q'] = {'mode': self.q.mode.value,
                             'c_q': float(self.q.c_q)}
        document['scorer']['hidden_layers'] = list(self.scorer.hidden_layers)
        return document

    @classmethod
    def from_dict(cls, document):
        """Build a config from its JSON form.

        Raises:
            ConfigError: unknown keys or invalid values.
        """
        _check_keys(document, [item.name for item in fields(cls)], 'test')
        values = dict(document)
        for name in ('kernel_x', 'kernel_y'):
            if name in values:
                values[name] = _kernel_from_dict(values[name], name)
        if 'scorer' in values:
            _check_keys(values['scorer'],
                        [item.name for item in fields(ScorerSpec)], 'scorer')
            values['scorer'] = ScorerSpec(**values['scorer'])
        q = values.get('q', AUTO_Q)
        if q != AUTO_Q:
            _check_keys(q, ('mode', 'c_q'), 'q')
            values['q'] = QSpec(**q)
        return cls(**values)


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep of generator settings, each tested on several replicates.

    Args:
        generator (str): generator name, see ``simgen.generators``.
        params (GenParams): settings shared by every cell.
        sweep (dict): GenParams field -> list of values; the cells are the
            Cartesian product, in key order.
        test (TestConfig): test run on every replicate.
        replicates (int): datasets per cell.
        alpha (float): level of the rejection rate.
        seed (int): root seed of the replicate seeds.
        procedure (Procedure or str): ``bd_hsic`` or ``marginal_hsic``.
        workers (int): worker processes; 1 runs in the calling process.
    """

    generator: str
    params: GenParams = field(default_factory=GenParams)
    sweep: dict = field(default_factory=dict)
    test: TestConfig = field(default_factory=TestConfig)
    replicates: int = 1
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    procedure: Procedure = Procedure.BD_HSIC
    workers: int = 1

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f'unknown generator {self.generator!r}')
        try:
            object.__setattr__(self, 'procedure', Procedure(self.procedure))
        except ValueError:
            raise ConfigError(f'unknown procedure {self.procedure!r}')
        if int(self.replicates) < 1:
            raise ConfigError('replicates must be at least 1')
        if not 0 < float(self.alpha) < 1:
            raise ConfigError(f'alpha must lie in (0, 1), got {self.alpha}')
        if int(self.workers) < 1:
            raise ConfigError('workers must be at least 1')
        names = [item.name for item in fields(GenParams)]
        for key, values in self.sweep.items():
            if key not in names or key == 'seed':
                raise ConfigError(f'cannot sweep over {key!r}')
            if not isinstance(values, (list, tuple)) or not values:
                raise ConfigError(f'sweep over {key!r} needs a non-empty '
                                  f'list')
        object.__setattr__(self, 'sweep', {key: list(values) for key, values
                                           in self.sweep.items()})

    def to_dict(self):
        """JSON form, without the worker count."""
        return {
            'generator': self.generator,
            'params': self.params.to_dict(),
            'sweep': self.sweep,
            'test': self.test.to_dict(),
            'replicates': int(self.replicates),
            'alpha': float(self.alpha),
            'seed': int(self.seed),
            'procedure': self.procedure.value,
        }

    @classmethod
    def from_dict(cls, document):
        """Build an experiment from its JSON form.

        Raises:
            ConfigError: unknown keys, missing generator or invalid values.
        """
        _check_keys(document, [item.name for item in fields(cls)],
                    'experiment')
        if 'generator' not in document:
            raise ConfigError('experiment needs a generator')
        values = dict(document)
        if 'params' in values:
            _check_keys(values['params'],
                        [item.name for item in fields(GenParams)], 'params')
            values['params'] = GenParams.from_dict(values['params'])
        if 'test' in values:
            values['test'] = TestConfig.from_dict(values['test'])
        return cls(**values)


def load_experiment_config(path):
    """Read an experiment JSON file.

    Args:
        path (str): file to read.

    Returns:
        ExperimentConfig: the validated config.

    Raises:
        ConfigError: unreadable JSON or invalid content.
    """
    with open(path, encoding='utf-8') as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as error:
            raise ConfigError(f'{path} is not valid JSON: {error}')
    config = ExperimentConfig.from_dict(document)
    LOGGER.info('experiment %s: %s sweep keys, %s replicates', path,
                len(config.sweep), config.replicates)
    return config
