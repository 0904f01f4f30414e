"""Build glue for the optional compiled scan kernels.

The package is pure Python plus one accelerator extension (llmon._scan).
If Cython or a compiler is missing the build falls through to the pure
fallback in llmon._scan_py; nothing else changes.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("llmon._scan", ["src/llmon/_scan.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
