"""Numpy fallback for the compiled kernels in videval._native.

Same call signatures, same accumulation formulas; only summation order (and
hence the last few ulps) may differ from the compiled path.
"""

import numpy as np


def pair_sums(a, b):
    """Return (sum a, sum b, sum a*a, sum b*b, sum a*b) over two planes."""
    return (
        float(np.sum(a)),
        float(np.sum(b)),
        float(np.sum(a * a)),
        float(np.sum(b * b)),
        float(np.sum(a * b)),
    )


def sq_diff_sum(a, b):
    """Return sum((a - b)^2) over two flat arrays."""
    d = a - b
    return float(np.sum(d * d))
