# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: fused reduction passes over frame planes.

Mirrors videval._kernels_py; videval.kernels picks whichever is available.
"""


def pair_sums(double[:, ::1] a, double[:, ::1] b):
    """Return (sum a, sum b, sum a*a, sum b*b, sum a*b) over two planes."""
    cdef Py_ssize_t i, j
    cdef Py_ssize_t h = a.shape[0]
    cdef Py_ssize_t w = a.shape[1]
    cdef double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0
    cdef double x, y
    if b.shape[0] != h or b.shape[1] != w:
        raise ValueError("pair_sums: shape mismatch")
    for i in range(h):
        for j in range(w):
            x = a[i, j]
            y = b[i, j]
            sa += x
            sb += y
            saa += x * x
            sbb += y * y
            sab += x * y
    return sa, sb, saa, sbb, sab


def sq_diff_sum(double[::1] a, double[::1] b):
    """Return sum((a - b)^2) over two flat arrays."""
    cdef Py_ssize_t i
    cdef Py_ssize_t n = a.shape[0]
    cdef double s = 0.0, d
    if b.shape[0] != n:
        raise ValueError("sq_diff_sum: length mismatch")
    for i in range(n):
        d = a[i] - b[i]
        s += d * d
    return s
