# -*- coding: utf-8 -*-
"""
    Wall-clock logging for long-running entry points.

    Notes:
        Arguments are not logged: they are typically large arrays.
"""

import functools
import logging as log
import time

log.basicConfig(level=log.INFO)
LOGGER = log.getLogger(__name__)


def timeit(method):
    """Log the time a function takes to execute.

    Used as a decorator on training routines, ``run_test`` and
    ``run_experiment``. The elapsed time is logged at INFO level under the
    ``bdhsic.log.timing`` logger.
    """
    @functools.wraps(method)
    def timed(*args, **kw):
        start = time.perf_counter()
        result = method(*args, **kw)
        elapsed = time.perf_counter() - start
        LOGGER.info('[time] %s.%s %2.2f sec',
                    method.__module__, method.__qualname__, elapsed)
        return result
    return timed
