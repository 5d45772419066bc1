"""Build hook for the optional compiled simplex kernel.

If Cython or a C compiler is missing, the package installs without the
extension and the numpy kernel is used instead.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: compiled kernel not built ({exc}); using the numpy kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: {ext.name} not built ({exc}); using the numpy kernel")


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "agilesched.solver._simplex_ext",
        ["src/agilesched/solver/_simplex_ext.pyx"],
        extra_compile_args=["-O3"],
    )
    try:
        return cythonize([ext], language_level=3, quiet=True)
    except Exception as exc:  # pragma: no cover - toolchain dependent
        print(f"warning: compiled kernel not generated ({exc}); using the numpy kernel")
        return []


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
