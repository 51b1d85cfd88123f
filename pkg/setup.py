"""Builds the optional Cython kernel for the aligner's EM inner loop.

The package works without it: genderlens.align falls back to the numpy
implementation when the compiled module is absent.
"""

from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("genderlens.align._em_cy", ["src/genderlens/align/_em_cy.pyx"])],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
