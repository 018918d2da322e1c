# -*- coding: utf-8 -*-
"""Differentiable log-ratio scorer and its noise contrastive trainer.

The scorer is a small fully connected network s(u; theta) on the
concatenation u = (x, z), read as a log density ratio: r(u) = exp(s(u)). It
is trained to tell numerator samples (label 1) from denominator samples
(label 0) with the classifier h(u) = sigmoid(s(u) - ln nu), which gives the
noise contrastive loss

    mean_num softplus(ln nu - s) + nu * mean_den softplus(s - ln nu).

Forward and backward passes are written out with numpy so that the analytic
gradients can be audited against finite differences
(``scorer_gradient_check``). Training is plain minibatch gradient descent
with early stopping on a held-out validation loss.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from scipy.special import expit

from bdhsic.errors import ConfigError, DataError, EstimatorError
from bdhsic.log.logging import LoggerMixin
from bdhsic.log.timing import timeit

logging.basicConfig(level=logging.INFO)
LOGGER = logging.getLogger(__name__)

ACTIVATIONS = ('tanh', 'relu')


@dataclass(frozen=True)
class ScorerSpec:
    """Architecture and optimiser settings of a scorer.

    Args:
        hidden_layers (tuple): widths of the hidden layers; empty for a
            linear scorer.
        activation (str): ``tanh`` or ``relu``.
        learning_rate (float): gradient descent step.
        batch_size (int): numerator samples per minibatch.
        max_epochs (int): epoch cap.
        patience (int): epochs without validation improvement before
            stopping.
        nu (float): noise-to-data ratio.
        seed (int): seed of initialisation, splits and shuffling.
        validation_fraction (float): share of each class held out.
        min_delta (float): smallest validation decrease that resets the
            patience counter.
    """

    hidden_layers: tuple = (32, 32)
    activation: str = 'tanh'
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 300
    patience: int = 15
    nu: float = 1.0
    seed: int = 0
    validation_fraction: float = 0.2
    min_delta: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, 'hidden_layers',
                           tuple(int(width) for width in self.hidden_layers))
        if any(width < 1 for width in self.hidden_layers):
            raise ConfigError('hidden layer widths must be at least 1')
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f'unknown activation {self.activation!r}')
        if not self.learning_rate > 0:
            raise ConfigError('learning_rate must be positive')
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigError('batch_size and max_epochs must be positive')
        if self.patience < 1:
            raise ConfigError('patience must be at least 1')
        if not self.nu > 0:
            raise ConfigError('nu must be positive')
        if self.min_delta < 0:
            raise ConfigError('min_delta must be non-negative')
        if not 0 < self.validation_fraction < 1:
            raise ConfigError('validation_fraction must lie in (0, 1)')

    def with_seed(self, seed):
        """Copy of the spec with another seed."""
        values = dict(self.__dict__)
        values['seed'] = int(seed)
        return ScorerSpec(**values)


def _activate(name, pre):
    if name == 'tanh':
        return np.tanh(pre)
    return np.maximum(pre, 0.0)


def _activation_slope(name, pre, post):
    if name == 'tanh':
        return 1.0 - post ** 2
    return (pre > 0).astype(float)


class Scorer(object):
    """Fully connected network u -> s(u) with a scalar output.

    Inputs are standardised with the shift and scale fixed at construction;
    they are not trained.

    Args:
        weights (list): weight matrices, layer l of shape (in_l, out_l).
        biases (list): bias vectors.
        activation (str): hidden activation.
        shift (numpy.ndarray): input mean.
        scale (numpy.ndarray): input standard deviation.
    """

    def __init__(self, weights, biases, activation, shift, scale):
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activation = activation
        self.shift = np.asarray(shift, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    @classmethod
    def initialise(cls, input_dim, spec, shift=None, scale=None):
        """Glorot-normal weights, zero biases."""
        rng = np.random.default_rng(spec.seed)
        sizes = (input_dim,) + spec.hidden_layers + (1,)
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            std = math.sqrt(2.0 / (fan_in + fan_out))
            weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        shift = np.zeros(input_dim) if shift is None else shift
        scale = np.ones(input_dim) if scale is None else scale
        return cls(weights, biases, spec.activation, shift, scale)

    @property
    def input_dim(self):
        return self.weights[0].shape[0]

    @property
    def layer_sizes(self):
        return [self.input_dim] + [w.shape[1] for w in self.weights]

    def copy(self):
        return Scorer([w.copy() for w in self.weights],
                      [b.copy() for b in self.biases],
                      self.activation, self.shift.copy(), self.scale.copy())

    def flat_parameters(self):
        """All weights and biases as one vector, layer by layer."""
        return np.concatenate([
            np.concatenate([w.ravel(), b.ravel()])
            for w, b in zip(self.weights, self.biases)])

    def set_flat_parameters(self, flat):
        """Inverse of ``flat_parameters``."""
        flat = np.asarray(flat, dtype=float).ravel()
        expected = sum(w.size + b.size
                       for w, b in zip(self.weights, self.biases))
        if flat.size != expected:
            raise ConfigError(f'parameter vector has {flat.size} entries, '
                              f'expected {expected}')
        offset = 0
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[layer] = flat[offset:offset + w.size] \
                .reshape(w.shape).copy()
            offset += w.size
            self.biases[layer] = flat[offset:offset + b.size].copy()
            offset += b.size

    def forward(self, inputs):
        """Scores and the activations needed by ``backward``."""
        activation = (np.asarray(inputs, dtype=float) - self.shift) \
            / self.scale
        memory = []
        last = len(self.weights) - 1
        for layer, (w, b) in enumerate(zip(self.weights, self.biases)):
            pre = activation @ w + b
            post = pre if layer == last else _activate(self.activation, pre)
            memory.append((activation, pre, post))
            activation = post
        return activation[:, 0], memory

    def score(self, inputs):
        """Log-ratio s(u) for every row of ``inputs``."""
        return self.forward(inputs)[0]

    def backward(self, d_scores, memory):
        """Parameter gradients given dLoss/dscore for every row."""
        grad_weights = [None] * len(self.weights)
        grad_biases = [None] * len(self.biases)
        upstream = d_scores[:, np.newaxis]
        last = len(self.weights) - 1
        for layer in range(last, -1, -1):
            inputs, pre, post = memory[layer]
            if layer != last:
                upstream = upstream * _activation_slope(self.activation,
                                                        pre, post)
            grad_weights[layer] = inputs.T @ upstream
            grad_biases[layer] = upstream.sum(axis=0)
            upstream = upstream @ self.weights[layer].T
        return grad_weights, grad_biases

    def to_dict(self):
        return {
            'layer_sizes': self.layer_sizes,
            'activation': self.activation,
            'shift': self.shift.tolist(),
            'scale': self.scale.tolist(),
            'parameters': self.flat_parameters().tolist(),
        }

    @classmethod
    def from_dict(cls, document):
        sizes = document['layer_sizes']
        scorer = cls([np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
                     [np.zeros(b) for b in sizes[1:]],
                     document['activation'], document['shift'],
                     document['scale'])
        scorer.set_flat_parameters(document['parameters'])
        return scorer


def nce_loss(scores_numerator, scores_denominator, nu=1.0):
    """Noise contrastive loss and its derivative with respect to the scores.

    Args:
        scores_numerator (numpy.ndarray): s(u) on numerator samples.
        scores_denominator (numpy.ndarray): s(u) on denominator samples.
        nu (float): noise-to-data ratio.

    Returns:
        tuple: (loss, d_numerator, d_denominator).
    """
    log_nu = math.log(nu)
    logits_num = scores_numerator - log_nu
    logits_den = scores_denominator - log_nu
    n_num = scores_numerator.shape[0]
    n_den = scores_denominator.shape[0]
    loss = (np.mean(np.logaddexp(0.0, -logits_num))
            + nu * np.mean(np.logaddexp(0.0, logits_den)))
    d_numerator = -expit(-logits_num) / n_num
    d_denominator = nu * expit(logits_den) / n_den
    return float(loss), d_numerator, d_denominator


def loss_and_gradient(scorer, numerator, denominator, nu=1.0):
    """Loss of ``scorer`` on the two classes and its parameter gradients."""
    scores_num, memory_num = scorer.forward(numerator)
    scores_den, memory_den = scorer.forward(denominator)
    loss, d_num, d_den = nce_loss(scores_num, scores_den, nu)
    grads_num = scorer.backward(d_num, memory_num)
    grads_den = scorer.backward(d_den, memory_den)
    grad_weights = [a + b for a, b in zip(grads_num[0], grads_den[0])]
    grad_biases = [a + b for a, b in zip(grads_num[1], grads_den[1])]
    return loss, grad_weights, grad_biases


def evaluate_loss(scorer, numerator, denominator, nu=1.0):
    """Loss only."""
    return nce_loss(scorer.score(numerator), scorer.score(denominator),
                    nu)[0]


@dataclass
class TrainingReport:
    """What happened while training one scorer."""

    train_losses: list = field(default_factory=list)
    validation_losses: list = field(default_factory=list)
    best_epoch: int = 0
    converged: bool = False

    @property
    def best_validation_loss(self):
        return self.validation_losses[self.best_epoch]

    def running_best_train_losses(self):
        """Running minimum of the per-epoch training loss."""
        return np.minimum.accumulate(self.train_losses).tolist()

    def to_dict(self):
        return {'best_epoch': self.best_epoch, 'converged': self.converged,
                'epochs': len(self.validation_losses),
                'best_validation_loss': float(self.best_validation_loss)}


def _split(rng, n, fraction):
    order = rng.permutation(n)
    n_validation = max(1, int(round(fraction * n)))
    if n_validation >= n:
        raise DataError('too few samples for a validation split')
    return order[n_validation:], order[:n_validation]


def _as_inputs(values, name):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if values.ndim != 2 or values.shape[0] < 2:
        raise DataError(f'{name} needs at least two rows')
    if not np.all(np.isfinite(values)):
        raise DataError(f'{name} contains non-finite entries')
    return values


class ScorerTrainer(LoggerMixin):
    """Minibatch gradient descent with validation early stopping.

    Args:
        spec (ScorerSpec): architecture and optimiser settings.
    """

    def __init__(self, spec):
        self.spec = spec

    @timeit
    def fit(self, numerator, denominator):
        """Train a scorer to estimate p_numerator / p_denominator.

        Args:
            numerator (array-like): samples of the numerator distribution.
            denominator (array-like): samples of the denominator
                distribution.

        Returns:
            tuple: (Scorer with the best validation loss, TrainingReport).

        Raises:
            DataError: too few rows or mismatched widths.
            EstimatorError: every training input is identical.
        """
        spec = self.spec
        numerator = _as_inputs(numerator, 'numerator')
        denominator = _as_inputs(denominator, 'denominator')
        if numerator.shape[1] != denominator.shape[1]:
            raise DataError('numerator and denominator widths differ')
        pooled = np.vstack([numerator, denominator])
        if np.all(np.ptp(pooled, axis=0) == 0):
            raise EstimatorError('all training inputs are identical')

        rng = np.random.default_rng(spec.seed)
        train_num, valid_num = _split(rng, numerator.shape[0],
                                      spec.validation_fraction)
        train_den, valid_den = _split(rng, denominator.shape[0],
                                      spec.validation_fraction)
        train_pool = np.vstack([numerator[train_num],
                                denominator[train_den]])
        scale = train_pool.std(axis=0)
        scale[scale == 0] = 1.0
        scorer = Scorer.initialise(numerator.shape[1], spec,
                                   shift=train_pool.mean(axis=0),
                                   scale=scale)

        n_steps = max(1, math.ceil(train_num.size / spec.batch_size))
        den_batch = math.ceil(train_den.size / n_steps)
        report = TrainingReport()
        best = scorer.copy()
        stale = 0
        best_loss = np.inf
        for epoch in range(spec.max_epochs):
            order_num = rng.permutation(train_num)
            order_den = rng.permutation(train_den)
            for step in range(n_steps):
                batch_num = order_num[step * spec.batch_size:
                                      (step + 1) * spec.batch_size]
                batch_den = order_den[step * den_batch:
                                      (step + 1) * den_batch]
                if batch_num.size == 0 or batch_den.size == 0:
                    continue
                _, grad_w, grad_b = loss_and_gradient(
                    scorer, numerator[batch_num], denominator[batch_den],
                    spec.nu)
                for layer in range(len(scorer.weights)):
                    scorer.weights[layer] -= spec.learning_rate \
                        * grad_w[layer]
                    scorer.biases[layer] -= spec.learning_rate \
                        * grad_b[layer]

            report.train_losses.append(evaluate_loss(
                scorer, numerator[train_num], denominator[train_den],
                spec.nu))
            validation = evaluate_loss(scorer, numerator[valid_num],
                                       denominator[valid_den], spec.nu)
            if not np.isfinite(validation):
                raise EstimatorError(f'validation loss diverged at epoch '
                                     f'{epoch}')
            report.validation_losses.append(validation)
            if validation < best_loss - spec.min_delta:
                stale = 0
            else:
                stale += 1
            if validation < best_loss:
                best_loss = validation
                report.best_epoch = epoch
                best = scorer.copy()
            if stale >= spec.patience:
                report.converged = True
                break

        if not report.converged:
            self.logger.warning(
                'validation loss still improving after %s epochs; returning '
                'the best snapshot (epoch %s)', spec.max_epochs,
                report.best_epoch)
        self.logger.info('best validation loss %.5f at epoch %s',
                         report.best_validation_loss, report.best_epoch)
        return best, report


def _default_probe(spec, input_dim=3, size=8):
    rng = np.random.default_rng(spec.seed + 1)
    numerator = rng.normal(size=(size, input_dim))
    denominator = rng.normal(0.5, 1.5, size=(size, input_dim))
    return numerator, denominator


def scorer_gradient_check(spec, probe=None, step=1e-5):
    """Largest relative gap between analytic and finite-difference gradients.

    Every parameter of a freshly initialised scorer is perturbed by +/-step
    and the central difference of the loss is compared with the backward
    pass. The relative error of one coordinate is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-2).

    Args:
        spec (ScorerSpec): architecture to check.
        probe (tuple): (numerator, denominator) samples with at least four
            rows in total; a seeded Gaussian probe is used when omitted.
        step (float): finite-difference step.

    Returns:
        float: the maximum relative error.

    Raises:
        DataError: fewer than four probe points.
    """
    numerator, denominator = probe if probe is not None \
        else _default_probe(spec)
    numerator = np.atleast_2d(np.asarray(numerator, dtype=float))
    denominator = np.atleast_2d(np.asarray(denominator, dtype=float))
    if numerator.shape[0] + denominator.shape[0] < 4:
        raise DataError('gradient check needs at least four probe points')
    scorer = Scorer.initialise(numerator.shape[1], spec)
    _, grad_w, grad_b = loss_and_gradient(scorer, numerator, denominator,
                                          spec.nu)
    analytic = np.concatenate([
        np.concatenate([gw.ravel(), gb.ravel()])
        for gw, gb in zip(grad_w, grad_b)])
    base = scorer.flat_parameters()
    numeric = np.empty_like(base)
    for index in range(base.size):
        shifted = base.copy()
        shifted[index] = base[index] + step
        scorer.set_flat_parameters(shifted)
        upper = evaluate_loss(scorer, numerator, denominator, spec.nu)
        shifted[index] = base[index] - step
        scorer.set_flat_parameters(shifted)
        lower = evaluate_loss(scorer, numerator, denominator, spec.nu)
        numeric[index] = (upper - lower) / (2.0 * step)
    scorer.set_flat_parameters(base)
    denominator_scale = np.maximum.reduce([np.abs(analytic),
                                           np.abs(numeric),
                                           np.full(base.size, 1e-2)])
    error = float(np.max(np.abs(analytic - numeric) / denominator_scale))
    LOGGER.info('gradient check %s %s: max relative error %.2e',
                spec.activation, spec.hidden_layers, error)
    return error
