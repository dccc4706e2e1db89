"""Build hook for the optional compiled contraction kernel.

The package is pure Python except for ``blockdmrg.btensor._pairs``, a small
Cython module that runs the per-block GEMM-accumulate loop without Python
dispatch overhead.  If Cython or a C compiler is unavailable the build falls
back to installing only the pure-Python kernel (the package selects between
the two at import time).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "blockdmrg.btensor._pairs",
                ["src/blockdmrg/btensor/_pairs.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
