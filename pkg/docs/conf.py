# -*- coding: utf-8 -*-
#
# homfield documentation build configuration file
#
# Build with: sphinx-build -b html docs docs/_build/html

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "homfield")))

try:
    import about
except ImportError:
    about = None

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.todo']

master_doc = 'contents'
exclude_patterns = ['_build']

project = 'homfield'
copyright = '2026, homfield developers'

version = "0.1.0"
release = version
if about:
    version = about.version
    release = about.version

html_theme = 'sphinxdoc'
htmlhelp_basename = 'homfielddoc'

latex_documents = [('contents', 'homfield.tex', 'homfield Documentation',
                    'homfield developers', 'manual')]
