# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Must stay bit-identical to ``_fallback.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()


def fps_indices(const double[:, ::1] pts, Py_ssize_t k, Py_ssize_t start, double tie_tol):
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t i, j, last, best_j
    cdef double d, dx, dy, dz, m, best, thresh, lx, ly, lz
    cdef double keep = 1.0 - tie_tol
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(k, dtype=np.int64)
    cdef double[::1] mind = np.full(n, np.inf)
    # struct-of-arrays copies so the distance loop vectorises
    cdef double[::1] xs = np.ascontiguousarray(pts[:, 0])
    cdef double[::1] ys = np.ascontiguousarray(pts[:, 1])
    cdef double[::1] zs = np.ascontiguousarray(pts[:, 2])

    out[0] = start
    last = start
    mind[last] = -1.0
    with nogil:
        for i in range(1, k):
            lx = xs[last]
            ly = ys[last]
            lz = zs[last]
            best = -1.0
            for j in range(n):
                dx = xs[j] - lx
                dy = ys[j] - ly
                dz = zs[j] - lz
                d = dx * dx + dy * dy
                d = d + dz * dz
                m = mind[j]
                m = d if d < m else m
                mind[j] = m
                best = m if m > best else best
            thresh = best * keep
            best_j = 0
            for j in range(n):
                if mind[j] >= thresh:
                    best_j = j
                    break
            out[i] = best_j
            mind[best_j] = -1.0
            last = best_j
    return out


def pair_distance_histogram(const double[:, ::1] pts, Py_ssize_t nbins, double lo, double scale, double edge_eps):
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t i, j, b
    cdef double d, dx, dy, dz
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(nbins, dtype=np.int64)
    cdef cnp.int64_t[::1] c = counts

    with nogil:
        for i in range(n - 1):
            for j in range(i + 1, n):
                dx = pts[j, 0] - pts[i, 0]
                dy = pts[j, 1] - pts[i, 1]
                dz = pts[j, 2] - pts[i, 2]
                d = dx * dx + dy * dy
                d = sqrt(d + dz * dz)
                b = <Py_ssize_t>floor((d - lo) * scale + edge_eps)
                if b < 0:
                    b = 0
                elif b >= nbins:
                    b = nbins - 1
                c[b] += 1
    return counts
