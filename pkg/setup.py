"""Build script: compiles the optional Cython kernels.

The package is fully functional without the compiled extensions -- every
kernel has a pure-Python twin and ``tuplematch._kernels`` picks whichever is
importable at runtime.  Extensions are marked ``optional`` so installation
succeeds on machines without a C toolchain.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_kwargs = dict(
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
    optional=True,
)

extensions = [
    Extension("tuplematch._kernels._hashing_c",
              ["src/tuplematch/_kernels/_hashing_c.pyx"], **ext_kwargs),
    Extension("tuplematch._kernels._hnsw_c",
              ["src/tuplematch/_kernels/_hnsw_c.pyx"], **ext_kwargs),
]

setup(
    ext_modules=cythonize(extensions, language_level="3") if cythonize else [],
)
