"""Build the optional compiled field kernels.

The package works without the extension (``dnfcurio._core_py`` is the
fallback), so a failed or skipped compile is not fatal.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("DNFCURIO_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "dnfcurio._core",
                    ["src/dnfcurio/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
