"""Builds the optional compiled similarity core.

``python setup.py build_ext --inplace`` (or a normal ``pip install .`` in an
environment that has Cython) compiles ``src/maskedkrr/_core_cy.pyx``. When
Cython or a C compiler is missing the package installs pure-Python and the
numpy core is selected at import instead. Set MASKEDKRR_SKIP_EXT=1 to force
the pure build.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MASKEDKRR_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "maskedkrr._core_cy",
                    ["src/maskedkrr/_core_cy.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
