"""Build script: compiles the optional Cython hot-kernel core.

The package works without the extension (besselgap.core falls back to the
pure NumPy twin), so the build is marked optional and is skipped entirely
when Cython is not installed.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "besselgap._corecy",
                ["src/besselgap/_corecy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
