"""Build the optional compiled kernels; the package falls back to pure Python without them."""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using pure Python", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc})", file=sys.stderr)


ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "pathloss_ann.numeric._ckernels",
                ["src/pathloss_ann/numeric/_ckernels.pyx"],
                # no FMA contraction, -march=native or -ffast-math: contraction or reassociation
                # would change results between machines and between backends
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
