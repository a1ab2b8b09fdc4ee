"""Build script for the compiled tile-simulation kernel.

The package works without the extension (a pure-Python backend is
selected at import time), so a missing Cython toolchain only costs
speed, not functionality.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "stasim._kernels._tilesim",
                ["src/stasim/_kernels/_tilesim.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
