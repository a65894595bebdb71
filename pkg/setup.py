import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional; dbqite.kernels falls back to numpy when it is absent.
ext_modules = []
if os.environ.get("DBQITE_NO_EXT") != "1":
    from Cython.Build import cythonize

    extensions = [
        Extension(
            "dbqite._kernels",
            ["src/dbqite/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
