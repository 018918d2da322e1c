# -*- coding: utf-8 -*-
"""JSON documents for trained ratio models.

A document records the model kind, its training dimensions and everything
needed to predict: flat scorer parameters, bridge schedules and classifier
coefficients. Training reports are not kept.
"""

import json
import logging

from bdhsic.errors import ConfigError
from bdhsic.ratio_estimation.categorical import CategoricalFactor
from bdhsic.ratio_estimation.models import CategoricalRatioModel, \
    MixedProductModel, ModelKind, ScorerRatioModel, UniformBaselineModel, \
    UnitWeightModel
from bdhsic.ratio_estimation.nce import BridgeSchedule
from bdhsic.ratio_estimation.scorer import Scorer

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1


def to_document(model):
    """Dict form of a trained model."""
    document = {'format': FORMAT_VERSION, 'kind': model.kind.value}
    if isinstance(model, UniformBaselineModel):
        document['seed'] = model.seed
        return document
    if isinstance(model, UnitWeightModel):
        return document
    document['x_dim'] = model.x_dim
    document['z_dim'] = model.z_dim
    if isinstance(model, ScorerRatioModel):
        document['scorers'] = [scorer.to_dict() for scorer in model.scorers]
        if model.schedule is not None:
            document['schedule'] = model.schedule.to_dict()
    elif isinstance(model, CategoricalRatioModel):
        document['factors'] = [factor.to_dict() for factor in model.factors]
    elif isinstance(model, MixedProductModel):
        document['categorical'] = to_document(model.categorical)
        document['continuous'] = to_document(model.continuous)
        document['cat_columns'] = list(model.cat_columns)
        document['cont_columns'] = list(model.cont_columns)
    return document


def from_document(document):
    """Rebuild a model from ``to_document`` output.

    Raises:
        ConfigError: unknown format or kind.
    """
    if document.get('format') != FORMAT_VERSION:
        raise ConfigError(f'unsupported model format '
                          f'{document.get("format")!r}')
    try:
        kind = ModelKind(document['kind'])
    except (KeyError, ValueError):
        raise ConfigError(f'unknown model kind {document.get("kind")!r}')

    if kind is ModelKind.UNIFORM_BASELINE:
        return UniformBaselineModel(int(document['seed']))
    if kind is ModelKind.UNIT_WEIGHTS:
        return UnitWeightModel()
    if kind in (ModelKind.NCEQ, ModelKind.TREQ):
        schedule = document.get('schedule')
        return ScorerRatioModel(
            [Scorer.from_dict(scorer) for scorer in document['scorers']],
            document['x_dim'], document['z_dim'],
            schedule=BridgeSchedule(tuple(schedule['alphas']))
            if schedule else None)
    if kind in (ModelKind.CATEGORICAL, ModelKind.CATEGORICAL_FACTORIZED):
        return CategoricalRatioModel(
            [CategoricalFactor.from_dict(factor)
             for factor in document['factors']],
            document['x_dim'], document['z_dim'],
            factorized=kind is ModelKind.CATEGORICAL_FACTORIZED)
    return MixedProductModel(from_document(document['categorical']),
                             from_document(document['continuous']),
                             document['cat_columns'],
                             document['cont_columns'])


def save_model(model, path):
    """Write the model document to ``path``."""
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(to_document(model), handle)
    LOGGER.info('%s model written to %s', model.kind.value, path)


def load_model(path):
    """Read a model document written by ``save_model``."""
    with open(path, encoding='utf-8') as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as error:
            raise ConfigError(f'{path} is not a model document: {error}')
    return from_document(document)
