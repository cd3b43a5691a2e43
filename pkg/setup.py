"""Builds the optional Cython sweep kernel.

The package works without it: shelfguide.reach_mdp.kernels falls back to the
numpy implementation when the extension is missing.
"""
from setuptools import setup, Extension

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "shelfguide.reach_mdp._sweep",
                ["src/shelfguide/reach_mdp/_sweep.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
