from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "vibnet._kernels",
                ["src/vibnet/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython: install pure-Python only, the backend falls back at import
    ext_modules = []

setup(ext_modules=ext_modules)
