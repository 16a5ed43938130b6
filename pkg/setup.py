"""Build the optional compiled kernels.

The package works without them: ``limid._backend`` falls back to the numpy
implementation when ``limid._ckernels`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LIMID_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "limid._ckernels",
                    ["src/limid/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
