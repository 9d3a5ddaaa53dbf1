import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: without Cython the package falls back to
# the pure-numpy implementations in pdcomp._core.kernels_py.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "pdcomp._core._kernels",
                ["src/pdcomp/_core/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
