# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('..'))


# -- Project information -----------------------------------------------------

project = 'perioscope'
copyright = '2021, perioscope developers'
author = 'perioscope developers'

from perioscope import __version__ as release


# -- General configuration ---------------------------------------------------

extensions = [
	'sphinx.ext.autodoc',
	'sphinx.ext.autosummary',
	'sphinx.ext.napoleon',
	'sphinx.ext.viewcode',
	'sphinx.ext.mathjax',
	'sphinx.ext.intersphinx',
	'sphinx_rtd_theme',
]

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']


# -- Extension configuration -------------------------------------------------

autosummary_generate = False

intersphinx_mapping = {
	'python' : ('https://docs.python.org/3.8', None),
	'numpy'  : ('https://numpy.org/doc/stable', None),
	'scipy'  : ('https://docs.scipy.org/doc/scipy', None),
}

autodoc_default_options = {
	'member-order' : 'bysource',
	'show-inheritance' : True,
}

autodoc_type_aliases = {
	'ArrayLike' : 'numpy.typing.ArrayLike',
	'NDArray' : 'numpy.ndarray',
}

napoleon_numpy_docstring = False
