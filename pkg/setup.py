"""Build script: compiles the optional expression-VM extension.

The package works without the extension (a pure-Python backend is selected
at import time), so a failed Cython/C build only costs speed, not features.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("eqgeo._vm", ["src/eqgeo/_vm.pyx"],
                   include_dirs=[numpy.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API",
                                   "NPY_1_7_API_VERSION")])],
        language_level=3,
    )
except Exception as exc:  # missing Cython / no C compiler
    print(f"eqgeo: skipping compiled backend ({exc}); "
          "the pure-Python backend will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
