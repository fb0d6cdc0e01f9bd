"""Build script for the optional compiled statevector kernels.

The package is pure Python plus one Cython extension holding the gate
application inner loops.  If Cython or a C compiler is unavailable the
build proceeds without the extension and the simulator falls back to
the numpy kernels at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qamm.qsim._kernels_cy",
                ["src/qamm/qsim/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
