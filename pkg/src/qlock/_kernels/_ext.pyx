# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels; same contracts as the numpy fallback."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def hash_inputs(cols, int n_in):
    cdef const long long[:, :] c = np.ascontiguousarray(cols, dtype=np.int64)
    cdef Py_ssize_t n_seeds = c.shape[0], n_inputs = (<Py_ssize_t>1) << n_in
    out_arr = np.empty((n_seeds, n_inputs), dtype=np.int32)
    cdef int[:, :] out = out_arr
    cdef Py_ssize_t s, size, j, col
    cdef int v
    for s in range(n_seeds):
        out[s, 0] = 0
        size = 1
        for col in range(n_in - 1, -1, -1):
            v = <int>c[s, col]
            for j in range(size):
                out[s, size + j] = out[s, j] ^ v
            size *= 2
    return out_arr


def accumulate_law(hashes, p, int n_keys):
    cdef const int[:, :] h = np.ascontiguousarray(hashes, dtype=np.int32)
    cdef const double[:] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t n_seeds = h.shape[0], n_inputs = h.shape[1]
    law_arr = np.zeros((n_keys, n_inputs))
    masses_arr = np.zeros((n_seeds, n_keys))
    valid_arr = np.zeros(n_seeds, dtype=np.uint8)
    cdef double[:, :] law = law_arr
    cdef double[:, :] masses = masses_arr
    cdef unsigned char[:] valid = valid_arr
    cdef Py_ssize_t s, i, k
    cdef bint ok
    for s in range(n_seeds):
        for i in range(n_inputs):
            masses[s, h[s, i]] += pv[i]
        ok = True
        for k in range(n_keys):
            if masses[s, k] <= 0:
                ok = False
                break
        if not ok:
            continue
        valid[s] = 1
        for i in range(n_inputs):
            k = h[s, i]
            law[k, i] += pv[i] / masses[s, k]
    return law_arr, masses_arr, valid_arr


def eta_sweep(F, idx, pj):
    cdef const double[:, :] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef const long long[:, :] ix = np.ascontiguousarray(idx, dtype=np.int64)
    cdef const double[:] q = np.ascontiguousarray(pj, dtype=np.float64)
    cdef Py_ssize_t n_seeds = ix.shape[0], n_keys = ix.shape[1], n_out = f.shape[1]
    out_arr = np.empty(n_seeds)
    cdef double[:] out = out_arr
    buf_arr = np.empty((n_keys, n_out))
    cdef double[:, :] buf = buf_arr
    cdef Py_ssize_t s, j, v, h, a, b, row
    cdef double x, y, acc, inv = 1.0 / n_keys
    for s in range(n_seeds):
        # gather whole rows, then butterfly across keys with j innermost
        for v in range(n_keys):
            row = ix[s, v]
            for j in range(n_out):
                buf[v, j] = f[row, j]
        h = 1
        while h < n_keys:
            for a in range(0, n_keys, 2 * h):
                for b in range(a, a + h):
                    for j in range(n_out):
                        x = buf[b, j]
                        y = buf[b + h, j]
                        buf[b, j] = x + y
                        buf[b + h, j] = x - y
            h *= 2
        acc = 0.0
        for v in range(n_keys):
            for j in range(n_out):
                acc += fabs(buf[v, j] - q[j])
        out[s] = acc * inv
    return out_arr


def locking_sweep(F, idx):
    cdef const double[:, :] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef const long long[:, :] ix = np.ascontiguousarray(idx, dtype=np.int64)
    cdef Py_ssize_t n_seeds = ix.shape[0], n_keys = ix.shape[1], n_out = f.shape[1]
    out_arr = np.empty(n_seeds)
    cdef double[:] out = out_arr
    buf_arr = np.empty((n_keys, n_out))
    cdef double[:, :] buf = buf_arr
    omega_arr = np.empty(n_out)
    cdef double[:] omega = omega_arr
    cdef Py_ssize_t s, j, v, h, a, b, row
    cdef double x, y, acc, mass, inv = 1.0 / n_keys
    for s in range(n_seeds):
        for v in range(n_keys):
            row = ix[s, v]
            for j in range(n_out):
                buf[v, j] = f[row, j]
        h = 1
        while h < n_keys:
            for a in range(0, n_keys, 2 * h):
                for b in range(a, a + h):
                    for j in range(n_out):
                        x = buf[b, j]
                        y = buf[b + h, j]
                        buf[b, j] = x + y
                        buf[b + h, j] = x - y
            h *= 2
        for j in range(n_out):
            omega[j] = 0.0
        for v in range(n_keys):
            mass = 0.0
            for j in range(n_out):
                mass += buf[v, j]
            mass = 1.0 / mass
            for j in range(n_out):
                buf[v, j] *= mass
                omega[j] += buf[v, j] * inv
        acc = 0.0
        for v in range(n_keys):
            for j in range(n_out):
                acc += fabs(buf[v, j] - omega[j])
        out[s] = acc * inv
    return out_arr
