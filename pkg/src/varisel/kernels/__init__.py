"""Learner inner loops, compiled when possible.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
pure-Python ``_pykernels`` take over. Setting ``VARISEL_PURE_PYTHON=1`` forces
the fallback. Both backends return bit-identical results.
"""

from __future__ import annotations

import os

from . import _pykernels

python_backend = _pykernels

try:
    if os.environ.get("VARISEL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _active
except ImportError:
    _active = _pykernels
    compiled_backend = None
else:
    compiled_backend = _active

BACKEND = "cython" if _active is compiled_backend else "python"

hinge_fit = _active.hinge_fit
rbf_kernel = _active.rbf_kernel
pegasos_kernel_fit = _active.pegasos_kernel_fit
logistic_sgd_fit = _active.logistic_sgd_fit
knn_predict = _active.knn_predict
best_split = _active.best_split

__all__ = [
    "BACKEND",
    "best_split",
    "compiled_backend",
    "hinge_fit",
    "knn_predict",
    "logistic_sgd_fit",
    "pegasos_kernel_fit",
    "python_backend",
    "rbf_kernel",
]
