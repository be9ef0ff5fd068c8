# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner-loop kernels. See ``_pykernels`` for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor

cnp.import_array()


def neighbor_lists(Py_ssize_t nelx, Py_ssize_t nely, double rmin):
    cdef Py_ssize_t reach = <Py_ssize_t>floor(rmin)
    cdef Py_ssize_t n = nelx * nely
    cdef Py_ssize_t ex, ey, jx, jy, k = 0, cap
    cdef double d
    cap = n * (2 * reach + 1) * (2 * reach + 1)
    indptr_a = np.zeros(n + 1, dtype=np.int64)
    indices_a = np.empty(cap, dtype=np.int64)
    weights_a = np.empty(cap, dtype=np.float64)
    cdef cnp.int64_t[::1] indptr = indptr_a
    cdef cnp.int64_t[::1] indices = indices_a
    cdef double[::1] weights = weights_a
    for ex in range(nelx):
        for ey in range(nely):
            # jx outer, jy inner yields ascending column index jx * nely + jy
            for jx in range(max(ex - reach, 0), min(ex + reach + 1, nelx)):
                for jy in range(max(ey - reach, 0), min(ey + reach + 1, nely)):
                    d = sqrt(<double>((jx - ex) * (jx - ex) + (jy - ey) * (jy - ey)))
                    if d <= rmin:
                        indices[k] = jx * nely + jy
                        weights[k] = rmin - d
                        k += 1
            indptr[ex * nely + ey + 1] = k
    return indptr_a, indices_a[:k].copy(), weights_a[:k].copy()


def weighted_sum(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                 const double[::1] weights, const double[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double acc
    out_a = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_a
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += weights[k] * x[indices[k]]
        out[i] = acc
    return out_a


def element_energy(const cnp.int64_t[:, ::1] edof, const double[::1] u, const double[:, ::1] k0):
    cdef Py_ssize_t n = edof.shape[0]
    cdef Py_ssize_t i, a, b
    cdef double ue[8]
    cdef double acc, row
    out_a = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_a
    for i in range(n):
        for a in range(8):
            ue[a] = u[edof[i, a]]
        acc = 0.0
        for a in range(8):
            row = 0.0
            for b in range(8):
                row += k0[a, b] * ue[b]
            acc += row * ue[a]
        out[i] = acc
    return out_a
