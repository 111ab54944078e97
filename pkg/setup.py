"""Build script for the compiled integrator core.

The Cython extension is optional: if it fails to build (no compiler, no
Cython), the package still installs and falls back to the pure-numpy
backend at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        Extension(
            "spinpump.backend._core",
            ["src/spinpump/backend/_core.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        ),
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
