# -*- coding: utf-8 -*-
"""
Logging helpers shared by trainers, models and the experiment runner.
"""

import logging


class LoggerMixin(object):
    """Give a class a ``logger`` named after its module and class.

    Trainers and models inherit from this so that every record carries the
    emitting component (``bdhsic.ratio_estimation.scorer.ScorerTrainer`` and so
    on) without declaring a logger in each class.
    """

    @property
    def logger(self):
        """
            Gets the logger for the current class.

            Returns:
                logger: ``logging.Logger`` named ``<module>.<class>``.
        """
        name = '.'.join([
            self.__module__,
            self.__class__.__name__
        ])
        return logging.getLogger(name)
