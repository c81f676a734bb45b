"""Build script: compiles the optional evaluation kernel.

The package is fully functional without the extension; a pure-Python tape
interpreter with identical semantics is selected at import time when the
compiled module is missing (see pathgeom.expr.tape).
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/pathgeom/_evalcore.pyx"],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # pragma: no cover - depends on toolchain
    warnings.warn(f"compiled evaluation core skipped, using pure-Python fallback: {exc}")

setup(ext_modules=ext_modules)
