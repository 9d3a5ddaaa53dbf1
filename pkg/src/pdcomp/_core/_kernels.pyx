# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-iteration kernels (see kernels_py.py for the reference twin).

The algorithms match the pure-numpy fallback operation-for-operation so both
backends produce identical floating-point results on the small vectors the
solver feeds them.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*> a)[0]
    cdef double db = (<const double*> b)[0]
    if da < db:
        return 1
    if da > db:
        return -1
    return 0


cdef extern from "stdlib.h":
    void qsort(void* base, size_t nmemb, size_t size,
               int (*compar)(const void*, const void*)) nogil


def project_simplex(double[::1] v):
    """Euclidean projection onto the unit simplex {u >= 0, sum(u) = 1}."""
    cdef Py_ssize_t n = v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double* u = <double*> malloc(n * sizeof(double))
    if u == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, rho
    cdef double cs, theta, d
    try:
        for i in range(n):
            u[i] = v[i]
        qsort(u, n, sizeof(double), _cmp_desc)
        cs = 0.0
        rho = 0
        theta = 0.0
        for i in range(n):
            cs += u[i]
            if u[i] - (cs - 1.0) / (i + 1.0) > 0.0:
                rho = i
                theta = (cs - 1.0) / (i + 1.0)
        for i in range(n):
            d = v[i] - theta
            out[i] = d if d > 0.0 else 0.0
    finally:
        free(u)
    return out


def soft_threshold(double[::1] v, double lam):
    """Componentwise shrinkage sign(v) * max(|v| - lam, 0)."""
    cdef Py_ssize_t n = v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    cdef double a
    for i in range(n):
        a = fabs(v[i]) - lam
        if a < 0.0:
            a = 0.0
        out[i] = a if v[i] > 0.0 else (-a if v[i] < 0.0 else 0.0)
    return out


def project_soc(double[::1] v):
    """Projection onto the second-order cone {(t, u) : ||u|| <= t}."""
    cdef Py_ssize_t n = v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double t = v[0]
    cdef double sq = 0.0
    cdef double nu, alpha, scale
    cdef Py_ssize_t i
    for i in range(1, n):
        sq += v[i] * v[i]
    nu = sqrt(sq)
    if nu <= t:
        for i in range(n):
            out[i] = v[i]
        return out
    if nu <= -t:
        for i in range(n):
            out[i] = 0.0
        return out
    alpha = 0.5 * (t + nu)
    scale = alpha / nu
    out[0] = alpha
    for i in range(1, n):
        out[i] = scale * v[i]
    return out


def project_nonneg(double[::1] v):
    """Projection onto the nonnegative orthant."""
    cdef Py_ssize_t n = v.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = v[i] if v[i] > 0.0 else 0.0
    return out
