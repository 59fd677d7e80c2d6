# Sphinx configuration of the frnet documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

project = 'frnet'
copyright = '2026, frnet developers'
author = 'frnet developers'
release = '0.1'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx_rtd_theme',
]

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']

autoclass_content = 'both'
# autodoc renders the '#:' attribute comments of the settings and config classes
autodoc_member_order = 'bysource'
