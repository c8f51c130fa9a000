from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; rmed._backend falls back
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rmed._core",
                ["src/rmed/_core.pyx"],
                # bitwise parity with the Python path: no fused multiply-add, no fast-math
                extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
