"""Backend selection for the hot loops.

The Cython extension ``fracwave._kernels`` is used when it was built; the
numpy implementation in ``_kernels_py`` is the fallback.  Setting
``FRACWAVE_BACKEND=python`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("FRACWAVE_BACKEND", "").lower() == "python":
    _impl = None
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = None

BACKEND = "cython" if _impl is not None else "python"


def thread_count():
    try:
        return max(1, int(os.environ.get("FRACWAVE_THREADS", "1")))
    except ValueError:
        return 1


def ml_table_eval(table, x, backend=None):
    impl = _select(backend)
    return impl.ml_table_eval(
        np.ascontiguousarray(x, dtype=float), table.x_lo, table.x_hi,
        table.series_coef, table.asym_coef, table.y0, table.h, table.cheb,
        table.alpha, table.beta, table.has_residue)


def history_accumulate(weights, index, history, out, backend=None):
    impl = _select(backend)
    if impl is _kernels_py:
        return impl.history_accumulate(weights, index, history, out)
    return impl.history_accumulate(weights, index, history, out, thread_count())


def _select(backend):
    if backend == "python" or (backend is None and _impl is None):
        return _kernels_py
    if _impl is None:
        raise RuntimeError("compiled kernels are not available")
    return _impl
