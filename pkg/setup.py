"""Build script for the optional compiled quadrature kernels.

The package works without the extension; ``eqweyl.oscquad.backend`` falls
back to the NumPy implementation when ``_kernels`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("EQWEYL_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "eqweyl.oscquad._kernels",
                    ["src/eqweyl/oscquad/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
