from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gkfrac._abel",
                ["src/gkfrac/_abel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython at build time: the package falls back to the numpy
    # implementation selected at import in gkfrac.quadrature.
    ext_modules = []

setup(ext_modules=ext_modules)
