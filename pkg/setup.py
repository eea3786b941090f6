"""Build script: compiles the optional accelerator extension when Cython is
available.  The package is fully functional without it (a pure-Python twin of
the kernel is selected at import time), so any failure here downgrades the
install to pure mode instead of aborting it."""

import os

from setuptools import Extension, setup

_PYX = "src/pbmin/_speedups.pyx"

ext_modules = []
if os.environ.get("PBMIN_PURE") != "1" and os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "pbmin._speedups",
                    [_PYX],
                    language="c++",
                    extra_compile_args=["-O3", "-std=c++11"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
