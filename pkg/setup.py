import numpy as np
from setuptools import Extension, setup

# The compiled walk kernel is optional: the package falls back to the
# pure-numpy backend in dyadiclab._kernels when the extension is missing.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "dyadiclab._kernels._walk_fast",
                ["src/dyadiclab/_kernels/_walk_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
