"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy fallback
is used. Set ``PEAKVERIFY_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKENDS = {"python": _kernels_py}

try:
    from . import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None
else:
    BACKENDS["compiled"] = _kernels_c

if _kernels_c is not None and not os.environ.get("PEAKVERIFY_PURE_PYTHON"):
    BACKEND = "compiled"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def median_positions(peaks, counts):
    """Generalized-median outcome position for each row of ``peaks``."""
    peaks = np.ascontiguousarray(peaks, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if peaks.shape[0] == 0:
        return np.empty(0, dtype=np.int8)
    return _impl.median_positions(peaks, counts)


def nash_mask(g, k, cands, score, bonus):
    """Pure Nash equilibrium flags over the product of candidate message lists."""
    g = np.ascontiguousarray(g, dtype=np.int8).reshape(-1)
    score = np.ascontiguousarray(score, dtype=np.int64)
    bonus = np.ascontiguousarray(bonus, dtype=np.int64)
    cands = [np.ascontiguousarray(c, dtype=np.int64) for c in cands]
    if any(len(c) == 0 for c in cands):
        return np.zeros(0, dtype=np.uint8)
    return _impl.nash_mask(g, k, cands, score, bonus)
