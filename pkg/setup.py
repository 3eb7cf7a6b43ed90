"""Build script: compiles the optical-flow hot kernels as a C extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed cythonize/compile is downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "tactilefoot.optflow._dis_cy",
                sources=["src/tactilefoot/optflow/_dis_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover
    warnings.warn(f"flow extension not built ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
