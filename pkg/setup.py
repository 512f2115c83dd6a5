"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-Python twin is selected
at import time), so any build failure here downgrades to a warning
instead of aborting the install. Set CTXCHOICE_NO_EXT=1 to skip the
extension entirely.
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            sys.stderr.write(f"ctxchoice: skipping compiled kernels ({exc})\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            sys.stderr.write(f"ctxchoice: skipping {ext.name} ({exc})\n")


ext_modules = []
if os.environ.get("CTXCHOICE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/ctxchoice/_kernels/_ckern.pyx"],
            language_level="3",
        )
    except ImportError:
        sys.stderr.write("ctxchoice: Cython not available, using pure-Python kernels\n")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
