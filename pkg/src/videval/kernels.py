"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set VIDEVAL_PURE=1 to force the numpy fallback (used by the benchmark and by
tests that exercise both paths).
"""

import os

import numpy as np

from videval import _kernels_py

if os.environ.get("VIDEVAL_PURE", "").lower() in ("1", "true", "yes"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from videval import _native as _impl  # type: ignore[no-redef]
        BACKEND = "native"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def backend() -> str:
    """Name of the active kernel implementation: 'native' or 'python'."""
    return BACKEND


def _plane(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pair_sums(a: np.ndarray, b: np.ndarray):
    """(sum a, sum b, sum a*a, sum b*b, sum a*b) over two 2-D planes."""
    return _impl.pair_sums(_plane(a), _plane(b))


def sq_diff_sum(a: np.ndarray, b: np.ndarray) -> float:
    """sum((a - b)^2) over two arrays of equal size (flattened)."""
    return _impl.sq_diff_sum(_plane(a).reshape(-1), _plane(b).reshape(-1))
