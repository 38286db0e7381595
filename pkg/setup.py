"""Build script for the optional compiled kernels.

If Cython or a C compiler is missing the package installs without the
extension and falls back to the numpy kernels at import time.
"""
import os

from setuptools import setup


def _cflags():
    # -ffast-math lets gcc call the vectorised libm; it is passed to the
    # compile step only so the fast-math startup object is never linked in.
    flags = ["-O3", "-ffast-math"]
    if os.environ.get("WIGNERKIN_NATIVE", "1") != "0":
        flags.append("-march=native")
    return flags


ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("wignerkin._kernels", ["src/wignerkin/_kernels.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                   extra_compile_args=_cflags(),
                   libraries=["mvec", "m"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
