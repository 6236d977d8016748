"""Build script: compiles the optional Cython kernel extension.

The extension accelerates the per-element quadrature loops used inside the
Newton iteration of the time stepper.  If compilation is impossible (no C
compiler, no Cython) the package still installs and falls back to the NumPy
kernels in ``railbeam._kernels._ref`` at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise warn and continue."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: skipping compiled kernels ({exc}); "
                  "railbeam will use the pure NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: failed to compile {ext.name} ({exc}); "
                  "railbeam will use the pure NumPy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build environment dependent
        return []
    ext = Extension(
        "railbeam._kernels._fast",
        ["src/railbeam/_kernels/_fast.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
