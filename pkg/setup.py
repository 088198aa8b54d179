"""Build script.

The compiled kernel module is optional: when Cython (and a C compiler) are
available the hot loops run through ``krylovlp._accel._core``; otherwise the
package installs pure Python and selects the NumPy fallback at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "krylovlp._accel._core",
                ["src/krylovlp/_accel/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython not available; building without the compiled kernel core.")

setup(ext_modules=ext_modules)
