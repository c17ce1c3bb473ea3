import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "polyrand.vinogradov._counting",
                ["src/polyrand/vinogradov/_counting.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

# The package works without the extension: the pure-Python kernels in
# polyrand.vinogradov._counting_py are picked up at import time.
setup(ext_modules=ext_modules)
