from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "phaseq._exprcore",
                ["src/phaseq/_exprcore.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    # Pure-Python fallback stays usable without Cython.
    extensions = []

setup(ext_modules=extensions)
