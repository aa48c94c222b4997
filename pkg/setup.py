import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [
            Extension(
                "qpfdyn._kernels_c",
                ["src/qpfdyn/_kernels_c.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-Python fallback is selected at import time, see qpfdyn.kernels
    extensions = []

setup(ext_modules=extensions)
