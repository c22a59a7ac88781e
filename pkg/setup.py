import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to the
# pure-Python implementation when the extension is absent.
ext_modules = []
if os.environ.get("FACTFORGE_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "factforge._speedups",
                    ["src/factforge/_speedups.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
