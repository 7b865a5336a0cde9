import os

from setuptools import Extension, setup

_PYX = os.path.join("src", "cogmesh", "_speedups.pyx")

# The compiled kernels are optional: the package falls back to the pure
# Python reference backend when the extension is absent or fails to build.
ext_modules = []
if os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("cogmesh._speedups", [_PYX])],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
