import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled module only accelerates the hot loops; the package falls back
# to the pure-Python implementation when the build is unavailable.
ext = Extension(
    "kne._speedups",
    ["src/kne/_speedups.pyx"],
    extra_compile_args=["-O3", "-funroll-loops", "-fno-math-errno"],
    optional=True,
)

if cythonize is not None and os.environ.get("KNE_PURE_PYTHON") != "1":
    ext_modules = cythonize([ext], language_level="3")
else:
    ext_modules = []

setup(ext_modules=ext_modules)
