# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_core_py``: fused loops for the masked pair sums and
streaming moments. Built by setup.py when Cython is available."""

import numpy as np


def masked_dot_norms(double[:, ::1] xl, unsigned char[:, ::1] ml,
                     double[:, ::1] xr, unsigned char[:, ::1] mr):
    cdef Py_ssize_t nl = xl.shape[0]
    cdef Py_ssize_t nr = xr.shape[0]
    cdef Py_ssize_t m = xl.shape[1]
    s_arr = np.empty((nl, nr), dtype=np.float64)
    l2_arr = np.empty((nl, nr), dtype=np.float64)
    r2_arr = np.empty((nl, nr), dtype=np.float64)
    cdef double[:, ::1] s = s_arr
    cdef double[:, ::1] l2 = l2_arr
    cdef double[:, ::1] r2 = r2_arr
    cdef Py_ssize_t i, j, t
    cdef double acc, accl, accr, a, b
    for i in range(nl):
        for j in range(nr):
            acc = 0.0
            accl = 0.0
            accr = 0.0
            for t in range(m):
                a = xl[i, t]
                b = xr[j, t]
                acc += a * b
                if mr[j, t]:
                    accl += a * a
                if ml[i, t]:
                    accr += b * b
            s[i, j] = acc
            l2[i, j] = accl
            r2[i, j] = accr
    return s_arr, l2_arr, r2_arr


def masked_column_moments(double[:, ::1] x, unsigned char[:, ::1] p):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    mean_arr = np.zeros(m, dtype=np.float64)
    m2_arr = np.zeros(m, dtype=np.float64)
    count_arr = np.zeros(m, dtype=np.int64)
    cdef double[::1] mean = mean_arr
    cdef double[::1] m2 = m2_arr
    cdef long long[::1] count = count_arr
    cdef Py_ssize_t i, t
    cdef double delta, v
    for i in range(n):
        for t in range(m):
            if p[i, t]:
                count[t] += 1
                v = x[i, t]
                delta = v - mean[t]
                mean[t] += delta / count[t]
                m2[t] += delta * (v - mean[t])
    return mean_arr, m2_arr, count_arr


def welford_stream(double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef double mean = 0.0
    cdef double m2 = 0.0
    cdef double delta, v
    cdef Py_ssize_t i
    for i in range(n):
        v = x[i]
        delta = v - mean
        mean += delta / (i + 1)
        m2 += delta * (v - mean)
    return mean, m2, n
