from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback only
    cythonize = None

extensions = [
    Extension(
        "jacedge._ckernels",
        ["src/jacedge/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(
        extensions,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
