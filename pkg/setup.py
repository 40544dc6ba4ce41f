"""Build script: compiles the optional split-search extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); set SRQA_NO_EXT=1 to skip compilation entirely.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("SRQA_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "srqa.regress._splitkern",
                    ["src/srqa/regress/_splitkern.pyx"],
                    include_dirs=[numpy.get_include()],
                    # -ffp-contract=off keeps the compiled kernel bit-identical
                    # to the NumPy fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
