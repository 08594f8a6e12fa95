from setuptools import Extension, setup

import numpy as np
from Cython.Build import cythonize

ext = Extension(
    "occube._hot._core",
    ["src/occube/_hot/_core.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level="3"))
