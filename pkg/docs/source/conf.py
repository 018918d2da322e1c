# -*- coding: utf-8 -*-
#
# Sphinx configuration of the bdhsic documentation.

import os
import sys

sys.path.insert(0, os.path.abspath('../..'))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.coverage',
              'sphinx.ext.napoleon']
autodoc_member_order = 'bysource'
napoleon_google_docstring = True
napoleon_numpy_docstring = False

source_suffix = '.rst'
master_doc = 'index'

project = 'bdhsic'
copyright = '2024, bdhsic developers'
version = '0.1'
release = '0.1.0'

pygments_style = 'sphinx'
html_theme = 'default'
htmlhelp_basename = 'bdhsicdoc'

man_pages = [
    ('index', 'bdhsic', 'bdhsic Documentation', ['bdhsic developers'], 1),
]
