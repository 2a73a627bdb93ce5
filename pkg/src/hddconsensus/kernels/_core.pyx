# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled round kernel; see ``_fallback.hdd_round`` for the reference."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def hdd_round(hist, indptr, indices, agents, eps, powers):
    cdef const double[:, ::1] h = np.ascontiguousarray(hist, dtype=np.float64)
    cdef const long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const long long[::1] ag = np.ascontiguousarray(agents, dtype=np.int64)
    cdef const double[:, ::1] e = np.ascontiguousarray(eps, dtype=np.float64)
    cdef const double[:, ::1] pw = np.ascontiguousarray(powers, dtype=np.float64)

    cdef Py_ssize_t horizon = h.shape[1]
    cdef Py_ssize_t last = horizon - 1
    means = np.zeros(ix.shape[0], dtype=np.float64)
    nxt = np.empty(ag.shape[0], dtype=np.float64)
    cdef double[::1] mu = means
    cdef double[::1] out = nxt

    cdef Py_ssize_t a, p, k
    cdef long long i, j
    cdef double acc, norm, x
    with nogil:
        for a in range(ag.shape[0]):
            i = ag[a]
            norm = 0.0
            for p in range(ip[i], ip[i + 1]):
                j = ix[p]
                acc = 0.0
                for k in range(horizon):
                    if fabs(h[j, k] - h[i, k]) <= e[i, k]:
                        acc = acc + pw[i, k]
                    else:
                        acc = acc + 0.0
                mu[p] = acc / horizon
                norm = norm + mu[p]
            norm = norm + 1.0
            x = 0.0
            for p in range(ip[i], ip[i + 1]):
                x = x + (mu[p] / norm) * h[ix[p], last]
            x = x + (1.0 / norm) * h[i, last]
            out[a] = x
    return means, nxt
