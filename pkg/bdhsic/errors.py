# -*- coding: utf-8 -*-
"""Exceptions raised by bdhsic.

Every exception derives from :class:`BdHsicError` and from the builtin that
best describes it, so ``except ValueError`` keeps working for callers that do
not know about this package. ``exit_code`` is what the command line returns
when the error escapes a subcommand.
"""


class BdHsicError(Exception):
    """Root of the bdhsic exception hierarchy."""

    exit_code = 1


class ConfigError(BdHsicError, ValueError):
    """Invalid configuration (kernel, scorer, q policy, experiment file)."""

    exit_code = 2


class EstimatorError(BdHsicError, RuntimeError):
    """A density ratio estimator could not be trained or evaluated."""

    exit_code = 3


class DataError(BdHsicError, ValueError):
    """Malformed, too small or pathological data."""

    exit_code = 4


class DimensionError(DataError):
    """Inputs whose shapes do not agree."""


class NonFiniteError(DataError):
    """Inputs containing NaN or infinite entries."""


class DomainError(DataError):
    """Arguments outside the domain of a formula.

    Raised for non-positive bandwidths, ``rho ** 2 >= 1/2``, all-zero weight
    vectors and non positive definite matrices in the c_q objective.
    """
