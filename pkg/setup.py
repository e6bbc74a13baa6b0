"""Build hook for the optional Cython kernels.

Metadata lives in pyproject.toml. If Cython or a C compiler is missing the
extension is skipped and varisel runs on its pure-Python kernels.
"""

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "varisel.kernels._ckernels",
                ["src/varisel/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no fast-math, no FMA contraction: results must match the Python kernels bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
