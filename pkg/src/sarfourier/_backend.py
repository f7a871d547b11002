"""Pick the compiled core when it is importable, numpy otherwise.

Set ``SARFOURIER_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pycore

core = _pycore
NAME = "python"

if not os.environ.get("SARFOURIER_PURE_PYTHON"):
    try:
        from . import _core as core  # noqa: F811
        NAME = "cython"
    except ImportError:
        pass


def set_num_threads(n: int):
    core.set_num_threads(int(n))
