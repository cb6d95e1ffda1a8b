"""Build script: compiles the progress-kernel extension when Cython is
available. Set STRATUS_NO_EXTENSION=1 to skip compilation; the package
then runs on the pure-Python kernels."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("STRATUS_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(["src/stratus/_speedups.pyx"], language_level=3)
    except ImportError:
        pass

setup(ext_modules=ext_modules)
