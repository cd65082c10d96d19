"""Build hook for the optional compiled kernel.

Metadata lives in pyproject.toml.  When Cython or a C compiler is missing
the package installs without the extension and uses the numpy fallback.
"""

import os
import tempfile

from setuptools import setup
from setuptools.command.build_ext import build_ext

# plain complex multiplication instead of the C99 Annex G NaN/Inf handling;
# the kernel only ever sees finite values
OPTIONAL_FLAGS = ["-fcx-limited-range"]


def _accepts(compiler, flag):
    with tempfile.TemporaryDirectory() as tmp:
        src = os.path.join(tmp, "probe.c")
        with open(src, "w") as fh:
            fh.write("int main(void) { return 0; }\n")
        try:
            compiler.compile([src], output_dir=tmp, extra_postargs=[flag])
        except Exception:
            return False
    return True


class BuildExt(build_ext):
    def build_extensions(self):
        extra = [f for f in OPTIONAL_FLAGS if _accepts(self.compiler, f)]
        for ext in self.extensions:
            ext.extra_compile_args = list(ext.extra_compile_args or []) + extra
        super().build_extensions()


def extensions():
    if os.environ.get("BOSESEP_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "bosesep._kernels._ext",
        ["src/bosesep/_kernels/_ext.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": BuildExt})
