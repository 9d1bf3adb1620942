"""Build the optional compiled engine core.

The extension is optional: if Cython or a C++ compiler is unavailable the
package installs with the pure-Python engine only.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"warning: compiled engine not built ({exc}); using pure Python", file=sys.stderr)


def extensions():
    if os.environ.get("LOBIMPACT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "lobimpact._cengine",
        sources=["src/lobimpact/_cengine.pyx"],
        include_dirs=["src/lobimpact"],
        language="c++",
        extra_compile_args=["-O3", "-std=c++17"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
