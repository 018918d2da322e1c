# -*- coding: utf-8 -*-
"""Ratio estimation for treatments with categorical and continuous columns.

The weight factorises as

    p(x_cat | x_cont) / p(x_cat | z, x_cont)  *  p(x_cont) / p(x_cont | z)

The first factor comes from two classifiers, the second from NCE-q or TRE-q
on (x_cont, z). Both use q = p.
"""

import logging

import numpy as np

from bdhsic.errors import DataError
from bdhsic.log.timing import timeit
from bdhsic.ratio_estimation.categorical import fit_factors
from bdhsic.ratio_estimation.models import CategoricalRatioModel, \
    MixedProductModel, as_block
from bdhsic.ratio_estimation.nce import product_pairs, train_nce_q, \
    train_tre_q

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)


@timeit
def train_mixed(x_cat, x_cont, z, spec, schedule=None, cat_columns=None,
                cont_columns=None):
    """Train the product model for mixed treatments.

    Args:
        x_cat (array-like): n x d_cat categorical treatments.
        x_cont (array-like): n x d_cont continuous treatments.
        z (array-like): n x d_Z confounders.
        spec (ScorerSpec): scorer settings; its seed also seeds the
            classifiers and the product pairs.
        schedule (BridgeSchedule): use TRE-q for the continuous factor;
            NCE-q when None.
        cat_columns (tuple): positions of the categorical columns in the
            full treatment matrix; the first d_cat columns by default.
        cont_columns (tuple): positions of the continuous columns.

    Returns:
        MixedProductModel: the composed model.

    Raises:
        DataError: an empty treatment block or mismatched rows.
    """
    x_cat, x_cont = as_block(x_cat, 'X_cat'), as_block(x_cont, 'X_cont')
    z = as_block(z, 'Z')
    if x_cat.shape[1] == 0 or x_cont.shape[1] == 0:
        raise DataError('mixed treatments need both blocks non-empty')
    if not x_cat.shape[0] == x_cont.shape[0] == z.shape[0]:
        raise DataError('treatment blocks and Z have different rows')

    factors, factorized = fit_factors(x_cat, {'z': z, 'x_cont': x_cont},
                                      numerator_features=('x_cont',),
                                      seed=spec.seed)
    categorical = CategoricalRatioModel(factors, x_cat.shape[1], z.shape[1],
                                        factorized=factorized)

    product = product_pairs(x_cont, z, seed=spec.seed)
    if schedule is None:
        continuous = train_nce_q((x_cont, z), product, spec)
    else:
        continuous = train_tre_q((x_cont, z), product, schedule, spec)

    d_cat, d_cont = x_cat.shape[1], x_cont.shape[1]
    cat_columns = tuple(range(d_cat)) if cat_columns is None \
        else tuple(cat_columns)
    cont_columns = tuple(range(d_cat, d_cat + d_cont)) \
        if cont_columns is None else tuple(cont_columns)
    LOGGER.info('mixed model: %s categorical, %s continuous columns',
                d_cat, d_cont)
    return MixedProductModel(categorical, continuous, cat_columns,
                             cont_columns)


def split_treatments(x, kinds):
    """Split X by column kind.

    Args:
        x (array-like): n x d treatments.
        kinds (list): ``binary`` / ``categorical`` or ``continuous`` per
            column.

    Returns:
        tuple: (x_cat, x_cont, cat_columns, cont_columns).
    """
    x = as_block(x, 'X')
    if len(kinds) != x.shape[1]:
        raise DataError('one kind per treatment column is required')
    cont_columns = tuple(i for i, kind in enumerate(kinds)
                         if kind == 'continuous')
    cat_columns = tuple(i for i in range(x.shape[1])
                        if i not in cont_columns)
    return (x[:, list(cat_columns)], x[:, list(cont_columns)],
            cat_columns, cont_columns)


def mixed_from_kinds(x, z, kinds, spec, schedule=None):
    """``train_mixed`` on a full treatment matrix with per-column kinds."""
    x_cat, x_cont, cat_columns, cont_columns = split_treatments(x, kinds)
    return train_mixed(x_cat, x_cont, np.asarray(z, dtype=float), spec,
                       schedule=schedule, cat_columns=cat_columns,
                       cont_columns=cont_columns)
