# -*- coding: utf-8 -*-
#
# clawex documentation build configuration file.
#
# Only the values that differ from the Sphinx defaults are set here.

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join("..", "..")))

# -- General configuration -----------------------------------------------------

extensions = ["sphinx.ext.autodoc"]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = u"clawex"
copyright = u"2026, clawex contributors"

# The short X.Y version and the full release string.
version = "1.0"
release = "1.0.0dev1"

exclude_patterns = []
pygments_style = "sphinx"

autodoc_member_order = "bysource"

# -- Options for HTML output ---------------------------------------------------

html_theme = "default"
html_static_path = []
htmlhelp_basename = "clawexdoc"

# -- Options for manual page output --------------------------------------------

man_pages = [
    (
        "usage",
        "clawex",
        u"Forensic examiner for OpenClaw agent artifact stores",
        [u"clawex contributors"],
        1,
    )
]
