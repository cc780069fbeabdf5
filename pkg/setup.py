"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); `optional=True` keeps installs green on hosts without a C
toolchain.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "newsrec.nar.kernels._gru_cy",
        ["src/newsrec/nar/kernels/_gru_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
