"""Build script for the optional compiled kernels.

The package is pure Python plus one Cython extension; if Cython or a C
compiler is unavailable the build falls back to the pure-Python kernels
(selected automatically at import time).
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "semuq._accel._kernels",
                ["src/semuq/_accel/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
