import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DRIFTCAP_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "driftcap._ckernels",
                    ["src/driftcap/_ckernels.pyx"],
                    # contraction to fma would change rounding versus the Python mirror
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
