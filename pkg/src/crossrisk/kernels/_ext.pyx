# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Mirrors _fallback.py. The call sites are tiny rolling windows evaluated
once per instrument per tick, so the win over numpy is mostly per-call
overhead; arithmetic is plain two-pass so both backends agree to
floating-point noise.
"""

from libc.math cimport fabs, sqrt

import numpy as np


def sample_std(values):
    cdef double[::1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef double mean = 0.0, acc = 0.0, d
    for i in range(n):
        mean += x[i]
    mean /= n
    for i in range(n):
        d = x[i] - mean
        acc += d * d
    return sqrt(acc / (n - 1))


def sample_cov(rows):
    cdef double[:, ::1] m = np.ascontiguousarray(rows, dtype=np.float64)
    cdef Py_ssize_t k = m.shape[0]
    cdef Py_ssize_t n = m.shape[1]
    cdef Py_ssize_t i, j, t
    out_arr = np.empty((k, k), dtype=np.float64)
    means_arr = np.empty(k, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] means = means_arr
    cdef double acc
    for i in range(k):
        acc = 0.0
        for t in range(n):
            acc += m[i, t]
        means[i] = acc / n
    for i in range(k):
        for j in range(i, k):
            acc = 0.0
            for t in range(n):
                acc += (m[i, t] - means[i]) * (m[j, t] - means[j])
            out[i, j] = acc / (n - 1)
            out[j, i] = out[i, j]
    return out_arr


def weighted_mean(values, weights):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double num = 0.0, den = 0.0
    for i in range(n):
        num += w[i] * v[i]
        den += w[i]
    return num / den


def weighted_sum(values, weights):
    cdef double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(n):
        acc += w[i] * v[i]
    return acc


def abs_pearson(x, y):
    cdef double[::1] a = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0, da, db, denom, r
    for i in range(n):
        ma += a[i]
        mb += b[i]
    ma /= n
    mb /= n
    for i in range(n):
        da = a[i] - ma
        db = b[i] - mb
        saa += da * da
        sbb += db * db
        sab += da * db
    denom = sqrt(saa * sbb)
    if denom == 0.0:
        return 0.0
    r = fabs(sab / denom)
    return r if r < 1.0 else 1.0
