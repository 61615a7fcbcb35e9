"""Build script: compiles the optional Cython sweep kernels.

The package works without the extension (a pure-Python fallback is
selected at import time), so any build failure here is non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy

    ext_modules = cythonize(
        ["src/rp_toolkit/sampling/_sweeps.pyx"],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs = include_dirs
except ImportError:
    pass

setup(ext_modules=ext_modules)
