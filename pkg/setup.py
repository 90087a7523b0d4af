"""Build script: compiles the optional Cython kernel core.

The extension is a pure speedup; if the toolchain is missing the package
installs anyway and fwf.backend falls back to the numpy implementation.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python backend when compilation fails."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            "WARNING: could not build the fwf._ckernels extension (%s); "
            "the pure-Python backend will be used.\n" % exc
        )


def extensions():
    if os.environ.get("FWF_NO_EXTENSION"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        sys.stderr.write("WARNING: %s; skipping extension build.\n" % exc)
        return []
    ext = Extension(
        "fwf._ckernels",
        ["src/fwf/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
