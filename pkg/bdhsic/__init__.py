# -*- coding: utf-8 -*-
"""Backdoor-adjusted HSIC permutation test of the causal do-null."""

__version__ = '0.1.0'
