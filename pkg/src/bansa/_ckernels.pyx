# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: masking, row renormalization and entropy.

Same contracts as ``_kernels_py``.  ``masked_terms`` fuses masking with both
entropy terms so no (K, N, N) intermediate is materialized.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double ZERO_ROW_MASS = 1e-12


cdef inline double _xlogx(double p) nogil:
    if p > 0.0:
        return -p * log(p)
    return 0.0


def row_entropy(const double[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], i, j
    cdef double h = 0.0
    with nogil:
        for i in range(n):
            for j in range(m):
                h += _xlogx(a[i, j])
    return h / n


def ensemble_terms(const double[:, :, ::1] samples):
    cdef Py_ssize_t k = samples.shape[0], n = samples.shape[1], m = samples.shape[2]
    cdef Py_ssize_t s, i, j
    cdef double acc, h_mean = 0.0, h_each = 0.0
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for s in range(k):
                    acc += samples[s, i, j]
                    h_each += _xlogx(samples[s, i, j])
                h_mean += _xlogx(acc / k)
    return h_mean / n, h_each / n / k


cdef int _masked_row(const double[:, ::1] a, const cnp.uint8_t[:, :, ::1] masks,
                     Py_ssize_t s, Py_ssize_t i, double* row) noexcept nogil:
    """Fill ``row`` with masked, renormalized row ``i`` of sample ``s``."""
    cdef Py_ssize_t j, m = a.shape[1]
    cdef double mass = 0.0
    cdef bint full = True
    for j in range(m):
        if masks[s, i, j]:
            row[j] = a[i, j]
            mass += a[i, j]
        else:
            row[j] = 0.0
            full = False
    if full or mass < ZERO_ROW_MASS:
        for j in range(m):
            row[j] = a[i, j]
    else:
        for j in range(m):
            row[j] = row[j] / mass
    return 0


def masked_samples(const double[:, ::1] a, const cnp.uint8_t[:, :, ::1] masks):
    cdef Py_ssize_t k = masks.shape[0], n = a.shape[0], m = a.shape[1], s, i, j
    out = np.empty((k, n, m), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    with nogil:
        for s in range(k):
            for i in range(n):
                _masked_row(a, masks, s, i, &o[s, i, 0])
    return out


def masked_terms(const double[:, ::1] a, const cnp.uint8_t[:, :, ::1] masks):
    cdef Py_ssize_t k = masks.shape[0], n = a.shape[0], m = a.shape[1], s, i, j
    cdef double h_mean = 0.0, h_each = 0.0
    cdef double* row = <double*> malloc(m * sizeof(double))
    cdef double* acc = <double*> malloc(m * sizeof(double))
    if row == NULL or acc == NULL:
        free(row)
        free(acc)
        raise MemoryError()
    with nogil:
        for i in range(n):
            for j in range(m):
                acc[j] = 0.0
            for s in range(k):
                _masked_row(a, masks, s, i, row)
                for j in range(m):
                    acc[j] += row[j]
                    h_each += _xlogx(row[j])
            for j in range(m):
                h_mean += _xlogx(acc[j] / k)
    free(row)
    free(acc)
    return h_mean / n, h_each / n / k
