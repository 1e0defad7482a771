import numpy
from setuptools import Extension, setup

extensions = [
    Extension(
        "orbitmatch._ckernels",
        ["src/orbitmatch/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: install the pure numpy backend only
    ext_modules = []
else:
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
