# -*- coding: utf-8 -*-
"""Calibration and power experiments.

An experiment sweeps generator settings. Every cell of the sweep generates
``replicates`` datasets and tests each one; the cell reports the rejection
rate at level alpha, the ESS of the weights, the number of clamped weights,
the failures and, where the do-null holds, a Kolmogorov-Smirnov check of the
p-values against Uniform(0, 1).

Replicate r of cell c draws its seeds from SeedSequence([seed, c, r]) only,
so results do not depend on worker count or completion order. Written files
leave out the wall-clock.
"""

import hashlib
import itertools
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from scipy import stats

from bdhsic.errors import BdHsicError
from bdhsic.harness.config import Procedure
from bdhsic.harness.procedure import marginal_hsic_test, run_test
from bdhsic.log.logging import LoggerMixin
from bdhsic.log.timing import timeit
from bdhsic.simgen.generators import generate

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

SUMMARY_FILE = 'summary.csv'
RECORDS_FILE = 'records.jsonl'
CONFIG_FILE = 'config.json'


def config_hash(config):
    """Short digest identifying an experiment or test configuration."""
    text = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:12]


def replicate_seeds(seed, cell, replicate):
    """(generator seed, test seed) of one replicate."""
    state = np.random.SeedSequence([int(seed), int(cell), int(replicate)]) \
        .generate_state(2)
    return int(state[0]), int(state[1])


def sweep_cells(config):
    """GenParams of every cell, in sweep order.

    Returns:
        list: (cell settings dict, GenParams) pairs.
    """
    keys = list(config.sweep)
    cells = []
    for values in itertools.product(*(config.sweep[key] for key in keys)):
        settings = dict(zip(keys, values))
        cells.append((settings, config.params.replace(**settings)))
    return cells


def run_replicate(job):
    """Generate and test one replicate.

    Args:
        job (tuple): (ExperimentConfig, cell index, GenParams, replicate).

    Returns:
        dict: the replicate record; ``failed`` is set when generation or
        testing raised.
    """
    config, cell, params, replicate = job
    gen_seed, test_seed = replicate_seeds(config.seed, cell, replicate)
    record = {'cell': cell, 'replicate': replicate,
              'generator_seed': gen_seed, 'test_seed': test_seed}
    try:
        data = generate(config.generator, params.replace(seed=gen_seed))
        test_config = config.test.with_seed(test_seed)
        if config.procedure is Procedure.MARGINAL_HSIC:
            result = marginal_hsic_test(data, test_config)
        else:
            result = run_test(data, test_config)
    except BdHsicError as error:
        LOGGER.warning('cell %s replicate %s failed: %s', cell, replicate,
                       error)
        record.update({'failed': True, 'error': str(error),
                       'error_type': type(error).__name__})
        return record
    record.update({
        'failed': False,
        'ground_truth_null': None if data.ground_truth_null is None
        else bool(data.ground_truth_null),
        'statistic': float(result.statistic),
        'p_value': float(result.p_value),
        'ess': float(result.ess),
        'clamped': int(result.diagnostics.get('clamped', 0)),
        'diagnostics': result.diagnostics,
    })
    return record


def summarise_cell(records, alpha):
    """Aggregate the records of one cell.

    Only counts and sums enter the aggregates, so the record order does not
    matter.

    Returns:
        dict: replicates, failures, rejections, rejection_rate, ESS mean
        and min, clamped, and KS statistic / p-value for null cells.
    """
    done = [record for record in records if not record['failed']]
    p_values = np.array([record['p_value'] for record in done])
    summary = {
        'replicates': len(records),
        'failures': len(records) - len(done),
        'rejections': int(np.count_nonzero(p_values <= alpha)),
        'rejection_rate': np.nan,
        'ess_mean': np.nan,
        'ess_min': np.nan,
        'clamped': int(sum(record['clamped'] for record in done)),
        'ground_truth_null': None,
        'ks_statistic': np.nan,
        'ks_pvalue': np.nan,
        'failed': not done,
    }
    if not done:
        return summary
    ess = np.array([record['ess'] for record in done])
    summary.update({
        'rejection_rate': summary['rejections'] / len(done),
        'ess_mean': float(ess.mean()),
        'ess_min': float(ess.min()),
        'ground_truth_null': all(record['ground_truth_null']
                                 for record in done),
    })
    if summary['ground_truth_null']:
        ks = stats.kstest(np.sort(p_values), 'uniform')
        summary['ks_statistic'] = float(ks.statistic)
        summary['ks_pvalue'] = float(ks.pvalue)
    return summary


@dataclass
class ExperimentResult:
    """Per-cell summary table and per-replicate records.

    Attributes:
        config (ExperimentConfig): the experiment run.
        table (pandas.DataFrame): one row per cell.
        records (list): one dict per replicate, sorted by cell and
            replicate.
        wall_clock (float): seconds spent; logged, never written.
    """

    config: object
    table: pd.DataFrame
    records: list = field(default_factory=list)
    wall_clock: float = 0.0

    def p_values(self, cell):
        """p-values of the successful replicates of ``cell``."""
        return [record['p_value'] for record in self.records
                if record['cell'] == cell and not record['failed']]

    def save(self, directory, sep=',', encoding='utf-8'):
        """Write the summary table, the records and the config.

        Files: ``summary.csv`` (delimited), ``records.jsonl`` (one JSON
        record per test, with the config hash) and ``config.json``.

        Returns:
            str: path of the summary table.
        """
        os.makedirs(directory, exist_ok=True)
        summary_path = os.path.join(directory, SUMMARY_FILE)
        self.table.to_csv(summary_path, sep=sep, index=False,
                          encoding=encoding)
        digest = config_hash(self.config)
        with open(os.path.join(directory, RECORDS_FILE), 'w',
                  encoding=encoding) as handle:
            for record in self.records:
                line = dict(record, config_hash=digest)
                handle.write(json.dumps(line, sort_keys=True) + '\n')
        with open(os.path.join(directory, CONFIG_FILE), 'w',
                  encoding=encoding) as handle:
            json.dump(self.config.to_dict(), handle, indent=2, sort_keys=True)
        LOGGER.info('%s cells written to %s', len(self.table), directory)
        return summary_path


class ExperimentRunner(LoggerMixin):
    """Runs the replicates of an experiment, in process or in a pool.

    Args:
        config (ExperimentConfig): the experiment.
    """

    def __init__(self, config):
        self.config = config

    def jobs(self):
        cells = sweep_cells(self.config)
        return cells, [(self.config, cell, params, replicate)
                       for cell, (_, params) in enumerate(cells)
                       for replicate in range(self.config.replicates)]

    def execute(self, jobs):
        if self.config.workers == 1:
            return [run_replicate(job) for job in jobs]
        self.logger.info('running %s replicates on %s workers', len(jobs),
                         self.config.workers)
        with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(run_replicate, jobs))

    @timeit
    def run(self):
        start = time.perf_counter()
        cells, jobs = self.jobs()
        records = sorted(self.execute(jobs),
                         key=lambda record: (record['cell'],
                                             record['replicate']))
        rows = []
        for cell, (settings, _) in enumerate(cells):
            summary = summarise_cell(
                [record for record in records if record['cell'] == cell],
                self.config.alpha)
            if summary['failed']:
                self.logger.error('cell %s %s: every replicate failed', cell,
                                  settings)
            rows.append(dict({'cell': cell}, **settings, **summary))
        table = pd.DataFrame(rows)
        wall_clock = time.perf_counter() - start
        self.logger.info('%s cells, %s replicates in %.1f s', len(cells),
                         len(jobs), wall_clock)
        return ExperimentResult(self.config, table, records, wall_clock)


def run_experiment(config):
    """Run every cell of ``config``.

    Args:
        config (ExperimentConfig): the experiment.

    Returns:
        ExperimentResult: summary table and records.
    """
    return ExperimentRunner(config).run()
