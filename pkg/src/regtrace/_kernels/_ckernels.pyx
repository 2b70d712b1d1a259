# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled summation kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()


cdef void _fill_roots(int n, double complex[::1] table):
    cdef int j
    for j in range(n):
        table[j] = cos(2.0 * M_PI * j / n) + 1j * sin(2.0 * M_PI * j / n)


def abel_root_sums(int n, double r, long K):
    cdef double complex[::1] table = np.empty(n, dtype=complex)
    cdef double complex[::1] out = np.zeros(n, dtype=complex)
    cdef long[::1] idx = np.zeros(n, dtype=np.int64)
    cdef long k
    cdef int m
    cdef double rk = 1.0
    _fill_roots(n, table)
    for k in range(K + 1):
        for m in range(n):
            out[m] += rk * table[idx[m]]
            idx[m] += m
            if idx[m] >= n:
                idx[m] -= n
        rk *= r
    return np.asarray(out)


def abel_trace_sums(int n, int nu, X, Y, double r, long K):
    cdef double complex[:, ::1] Xv = np.ascontiguousarray(X, dtype=complex)
    cdef double complex[:, ::1] Yv = np.ascontiguousarray(Y, dtype=complex)
    cdef double complex[::1] table = np.empty(n, dtype=complex)
    cdef double complex tp = 0, tq = 0, accp, accq, ph
    cdef long k
    cdef int alpha, beta, e
    cdef double rk = 1.0
    _fill_roots(n, table)
    for k in range(K + 1):
        accp = 0
        accq = 0
        for beta in range(nu):
            for alpha in range(nu, n):
                e = <int>((k * (beta - alpha + n)) % n)
                ph = table[e]
                accp += Xv[beta, alpha] * ph
                accq += Yv[alpha, beta] * ph.conjugate()
        tp += rk * accp
        tq += rk * accq
        rk *= r
    return complex(tp), complex(tq)
