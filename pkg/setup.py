"""Optional native build of the simulation hot path.

When Cython is importable the listed modules are compiled; otherwise, or with
DRAMKIT_PURE=1, the package installs as plain Python with identical behaviour.
Static types for the compiled build live in the ``.pxd`` files beside the
modules; annotations in the ``.py`` sources are documentation only.
"""

import os

from setuptools import setup

HOT = [
    "src/dramkit/dramspec/tree.py",
    "src/dramkit/dramspec/library.py",
    "src/dramkit/controller/request.py",
    "src/dramkit/controller/queues.py",
    "src/dramkit/controller/controller.py",
    "src/dramkit/controller/scheduler.py",
    "src/dramkit/memsys/frontend.py",
    "src/dramkit/memsys/system.py",
    "src/dramkit/memsys/mapper.py",
]


def _extensions():
    if os.environ.get("DRAMKIT_PURE") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(HOT, language_level=3, quiet=True, compiler_directives={"annotation_typing": False})


setup(ext_modules=_extensions())
