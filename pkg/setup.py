import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fracquery._kernels._speedups",
                ["src/fracquery/_kernels/_speedups.pyx"],
                include_dirs=[np.get_include()],
                # fp-contract off keeps results bit-identical with the
                # pure-Python kernel (no FMA reassociation)
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython: the package still works through the pure-Python kernels.
    extensions = []

setup(ext_modules=extensions)
