"""Hot-kernel dispatch: numba JIT by default, pure numpy on request.

Set ``WEARSCREEN_NUMBA=0`` (or ``false``/``off``/``no``) before import to
force the numpy fallback. The fallback is also selected automatically when
numba is not importable. ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

from . import numpy_impl

_flag = os.environ.get("WEARSCREEN_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "off", "no")

if _want_numba:
    try:
        from . import numba_impl as _impl

        USE_NUMBA = True
    except ImportError:
        _impl = numpy_impl
        USE_NUMBA = False
else:
    _impl = numpy_impl
    USE_NUMBA = False

build_cls_tree = _impl.build_cls_tree
build_reg_tree = _impl.build_reg_tree
predict_tree = _impl.predict_tree
smo_solve = _impl.smo_solve

__all__ = [
    "USE_NUMBA",
    "build_cls_tree",
    "build_reg_tree",
    "predict_tree",
    "smo_solve",
    "numpy_impl",
]
