import os
import sys

from setuptools import Extension, setup

# The compiled scan kernel is optional: the package falls back to the pure
# Python implementation in noodlefork._pyscan when the extension is absent.
ext_modules = []
pyx = os.path.join("src", "noodlefork", "_fastscan.pyx")
if os.path.exists(pyx):
    try:
        from Cython.Build import cythonize

        extensions = [
            Extension(
                "noodlefork._fastscan",
                [pyx],
                extra_compile_args=["-O3"],
            )
        ]
        ext_modules = cythonize(
            extensions, compiler_directives={"language_level": "3"}
        )
    except ImportError:
        sys.stderr.write(
            "Cython not available; building without the compiled scan core\n"
        )

setup(ext_modules=ext_modules)
