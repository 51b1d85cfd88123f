# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled EM expectation pass; same contract as _em_py.em_pass."""

from libc.math cimport log


def em_pass(double[::1] theta, int[::1] kflat, double[::1] dflat,
            long[::1] offsets, int[::1] rows, int[::1] cols,
            double[::1] counts):
    cdef double loglik = 0.0
    cdef Py_ssize_t p, i, j, base, idx
    cdef int r, c
    cdef long off
    cdef double z, score
    for p in range(offsets.shape[0]):
        off = offsets[p]
        r = rows[p]
        c = cols[p]
        for j in range(c):
            z = 0.0
            base = off + j
            for i in range(r):
                idx = base + i * c
                z += theta[kflat[idx]] * dflat[idx]
            loglik += log(z)
            for i in range(r):
                idx = base + i * c
                score = theta[kflat[idx]] * dflat[idx]
                counts[kflat[idx]] += score / z
    return loglik
