# -*- coding: utf-8 -*-
"""Command line interface.

    bdhsic simulate --gen continuous --set n=500 --seed 3 --out data.csv
    bdhsic test --data data.csv --estimator nce_q --nq 250 --seed 0 \
        --out result.json
    bdhsic experiment --config sweep.json --out results/
    bdhsic gradcheck

Exit codes: 0 success, 2 invalid configuration, 3 estimator failure, 4 data
error. Randomness is controlled by ``--seed`` only.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from bdhsic.errors import BdHsicError, ConfigError, DataError
from bdhsic.harness.config import AUTO_Q, Estimator, Procedure, TestConfig, \
    load_experiment_config
from bdhsic.harness.experiment import config_hash, run_experiment
from bdhsic.harness.procedure import marginal_hsic_test, run_test
from bdhsic.kernels.gram import MEDIAN_HEURISTIC, KernelSpec
from bdhsic.q_marginal.sampling import QMode, QSpec
from bdhsic.ratio_estimation.scorer import ScorerSpec, scorer_gradient_check
from bdhsic.ratio_estimation.serialization import load_model, save_model
from bdhsic.simgen.dataset import Dataset, GenParams
from bdhsic.simgen.generators import GENERATORS, generate
from bdhsic.statistic.permutation import DEFAULT_PERMUTATIONS

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-4
GRADCHECK_ARCHITECTURES = (
    ScorerSpec(hidden_layers=()),
    ScorerSpec(hidden_layers=(8,)),
    ScorerSpec(),
)


def _assignment(text):
    """``key=value`` with the value parsed as JSON when possible."""
    if '=' not in text:
        raise argparse.ArgumentTypeError(f'expected key=value, got {text!r}')
    key, value = text.split('=', 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _read_json(path):
    with open(path, encoding='utf-8') as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as error:
            raise ConfigError(f'{path} is not valid JSON: {error}')


def simulate_command(args):
    values = _read_json(args.params) if args.params else {}
    values.update(dict(args.set or []))
    values['seed'] = args.seed
    data = generate(args.gen, GenParams.from_dict(values))
    data.save(args.out, sep=args.sep)
    return 0


def _q_policy(text):
    if text == AUTO_Q:
        return AUTO_Q
    if text in (QMode.RESAMPLE.value, QMode.IDENTITY.value):
        return QSpec(text)
    try:
        return QSpec(QMode.SCALE, c_q=float(text))
    except ValueError:
        raise ConfigError(f'--q must be {AUTO_Q!r}, resample, identity or '
                          f'a positive c_q')


def _test_config(args):
    bandwidth = MEDIAN_HEURISTIC if args.bandwidth is None else args.bandwidth
    kernel = KernelSpec(args.kernel, bandwidth)
    scorer = TestConfig.from_dict({'scorer': _read_json(args.scorer)}).scorer \
        if args.scorer else ScorerSpec()
    return TestConfig(kernel_x=kernel, kernel_y=kernel,
                      estimator=args.estimator, q=_q_policy(args.q),
                      n_q=args.nq, seed=args.seed, scorer=scorer,
                      bridges=args.bridges)


def test_command(args):
    config = _test_config(args)
    data = Dataset.load(args.data, sep=args.sep)
    if Procedure(args.procedure) is Procedure.MARGINAL_HSIC:
        result = marginal_hsic_test(data, config)
    else:
        model = load_model(args.load_model) if args.load_model else None
        result, model = run_test(data, config, model=model,
                                 return_model=True)
        if args.save_model and model is not None:
            save_model(model, args.save_model)
    record = result.to_record()
    record.update({'config': config.to_dict(),
                   'config_hash': config_hash(config), 'seed': args.seed})
    with open(args.out, 'w', encoding='utf-8') as handle:
        json.dump(record, handle, indent=2, sort_keys=True)
    LOGGER.info('p-value %.4f written to %s', result.p_value, args.out)
    return 0


def experiment_command(args):
    config = load_experiment_config(args.config)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    run_experiment(config).save(args.out, sep=args.sep)
    return 0


def gradcheck_command(args):
    worst = 0.0
    for spec in GRADCHECK_ARCHITECTURES:
        error = scorer_gradient_check(spec.with_seed(args.seed))
        worst = max(worst, error)
        print(f'{spec.activation} {list(spec.hidden_layers)}: {error:.3e}')
    if worst > GRADIENT_TOLERANCE:
        LOGGER.error('gradient check failed: %.3e > %s', worst,
                     GRADIENT_TOLERANCE)
        return 3
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog='bdhsic',
        description='Backdoor-adjusted HSIC test of p(y | do(x)) = p(y).')
    commands = parser.add_subparsers(dest='command', required=True)

    sim = commands.add_parser('simulate', help='write a synthetic dataset')
    sim.add_argument('--gen', required=True, choices=sorted(GENERATORS))
    sim.add_argument('--params', help='JSON file of generator parameters')
    sim.add_argument('--set', action='append', type=_assignment,
                     metavar='KEY=VALUE', help='override one parameter')
    sim.add_argument('--seed', type=int, default=0)
    sim.add_argument('--out', required=True)
    sim.add_argument('--sep', default=',')
    sim.set_defaults(handler=simulate_command)

    tst = commands.add_parser('test', help='test one dataset')
    tst.add_argument('--data', required=True)
    tst.add_argument('--estimator', default=Estimator.TRUE_WEIGHTS.value,
                     choices=[item.value for item in Estimator])
    tst.add_argument('--kernel', default='rbf', choices=('rbf', 'linear'))
    tst.add_argument('--bandwidth', type=float)
    tst.add_argument('--nq', type=int, default=DEFAULT_PERMUTATIONS)
    tst.add_argument('--q', default=AUTO_Q,
                     help=f'{AUTO_Q!r}, resample, identity or a fixed c_q')
    tst.add_argument('--bridges', type=int, default=3)
    tst.add_argument('--scorer', help='JSON file of scorer settings')
    tst.add_argument('--procedure', default=Procedure.BD_HSIC.value,
                     choices=[item.value for item in Procedure])
    tst.add_argument('--seed', type=int, default=0)
    tst.add_argument('--save-model')
    tst.add_argument('--load-model')
    tst.add_argument('--out', required=True)
    tst.add_argument('--sep', default=',')
    tst.set_defaults(handler=test_command)

    exp = commands.add_parser('experiment', help='run a sweep')
    exp.add_argument('--config', required=True)
    exp.add_argument('--out', required=True)
    exp.add_argument('--workers', type=int)
    exp.add_argument('--sep', default=',')
    exp.set_defaults(handler=experiment_command)

    grad = commands.add_parser('gradcheck',
                               help='check the scorer gradients')
    grad.add_argument('--seed', type=int, default=0)
    grad.set_defaults(handler=gradcheck_command)
    return parser


def main(argv=None):
    """Run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except BdHsicError as error:
        LOGGER.error('%s: %s', type(error).__name__, error)
        return error.exit_code
    except OSError as error:
        LOGGER.error('%s', error)
        return DataError.exit_code


if __name__ == '__main__':
    sys.exit(main())
