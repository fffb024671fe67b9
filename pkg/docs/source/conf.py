# Sphinx configuration of the MotionCast API documentation.
#
# Build with: sphinx-build -b html docs/source docs/build

import sys
from pathlib import Path
from typing import Any

ROOT = Path(__file__).parents[2]
sys.path.insert(0, str(ROOT))

project = "MotionCast"
copyright = "2026, MotionCast developers"
author = "MotionCast developers"
release = "0.1.0"

extensions = [
    "myst_parser",
    "sphinx.ext.autodoc",
    "autoapi.extension",
    "sphinx.ext.napoleon",
]

source_suffix = {".rst": "restructuredtext", ".md": "markdown"}
master_doc = "index"

# docstrings use reST field lists (:param x:), not Google or NumPy sections
napoleon_google_docstring = False
napoleon_numpy_docstring = False
napoleon_use_param = True
napoleon_use_rtype = True

autoapi_type = "python"
autoapi_dirs = [str(ROOT / "motioncast")]
autoapi_ignore = ["*/tests/*"]
autoapi_options = ["members", "undoc-members", "show-inheritance", "show-module-summary"]
autoapi_member_order = "groupwise"

templates_path: Any = []
exclude_patterns: Any = ["build"]

html_theme = "sphinx_rtd_theme"
html_title = "MotionCast"
