import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """Build the compiled kernels when a toolchain is available.

    The package is fully functional without the extension (the numpy
    fallback in qramprep._kernels_py is selected at import time), so a
    missing compiler must not fail the install.
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernels skipped ({exc})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} skipped ({exc})")


extensions = []
if cythonize is not None and not os.environ.get("QRAMPREP_SKIP_EXT"):
    extensions = cythonize(
        [Extension("qramprep._kernels", ["src/qramprep/_kernels.pyx"])],
        language_level=3,
    )

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
