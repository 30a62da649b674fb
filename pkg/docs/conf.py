# -*- coding: utf-8 -*-
#
# phishcamp documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.

import sys, os

# Make the package importable for autodoc.
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

autodoc_member_order = 'bysource'

project = u'phishcamp'
copyright = u'phishcamp contributors'

version = '0.1'
release = '0.1.0'

exclude_patterns = ['_build']

pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'alabaster'

html_static_path = ['_static']

html_sidebars = {
    '**': ['localtoc.html', 'searchbox.html'],
}

htmlhelp_basename = 'phishcampdoc'

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'phishcamp', u'phishcamp Documentation',
     [u'phishcamp contributors'], 1)
]
