"""Build script: compiles the optional Cython polynomial kernel.

The package works without the extension (a pure-Python fallback is selected
at import time); set WEBRANK_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WEBRANK_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "webrank._kernel._poly_core",
                    ["src/webrank/_kernel/_poly_core.pyx"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
