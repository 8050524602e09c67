import numpy
from setuptools import Extension, setup

# The compiled kernel is an optimization, not a requirement: the package
# falls back to the pure-numpy stepper when the extension is unavailable.
try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "stirapberry._kernels",
                ["src/stirapberry/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -fcx-limited-range keeps complex multiplies inline (no
                # inf/nan-checking libcalls); the kernel never produces them
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
