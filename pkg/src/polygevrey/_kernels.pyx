# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the loops in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, M_PI

cnp.import_array()


def horner_eval(coeffs, z):
    cdef const double complex[:, ::1] c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef const double complex[::1] zz = np.ascontiguousarray(z, dtype=np.complex128)
    cdef Py_ssize_t n_comp = c.shape[0], width = c.shape[1], n_pts = zz.shape[0]
    out_arr = np.zeros(n_pts, dtype=np.complex128)
    acc_arr = np.empty(n_pts, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex[::1] acc = acc_arr
    cdef Py_ssize_t i, p, q
    cdef double complex cq
    # points in the inner loop: independent recurrences pipeline well
    for p in range(n_comp - 1, -1, -1):
        for i in range(n_pts):
            acc[i] = 0
        for q in range(width - 1, -1, -1):
            cq = c[p, q]
            for i in range(n_pts):
                acc[i] = acc[i] * zz[i] + cq
        for i in range(n_pts):
            out[i] = out[i] * zz[i].conjugate() + acc[i]
    return out_arr


def dft_direct(values, modes):
    cdef const double complex[::1] v = np.ascontiguousarray(values, dtype=np.complex128)
    cdef const long long[::1] md = np.ascontiguousarray(modes, dtype=np.int64)
    cdef Py_ssize_t m_pts = v.shape[0], n_modes = md.shape[0]
    out_arr = np.empty(n_modes, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    # twiddle table indexed by (j*m) mod M
    tw_arr = np.exp(-2j * np.pi * np.arange(m_pts) / m_pts)
    cdef const double complex[::1] tw = tw_arr
    cdef Py_ssize_t i, j
    cdef long long m, ph
    cdef double complex acc
    for i in range(n_modes):
        m = md[i] % m_pts
        if m < 0:
            m += m_pts
        acc = 0
        ph = 0
        for j in range(m_pts):
            acc = acc + v[j] * tw[ph]
            ph += m
            if ph >= m_pts:
                ph -= m_pts
        out[i] = acc / m_pts
    return out_arr


def kernel_sum(z, zeta, weights, int conj_power, int inv_power):
    cdef const double complex[::1] zz = np.ascontiguousarray(np.atleast_1d(z), dtype=np.complex128)
    cdef const double complex[::1] ze = np.ascontiguousarray(zeta, dtype=np.complex128)
    cdef const double complex[::1] w = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef Py_ssize_t n_z = zz.shape[0], n_src = ze.shape[0]
    out_arr = np.empty(n_z, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int e
    cdef double complex d, db, num, den, acc
    for i in range(n_z):
        acc = 0
        for j in range(n_src):
            d = zz[i] - ze[j]
            if d == 0:
                continue
            db = d.conjugate()
            num = 1
            for e in range(conj_power):
                num = num * db
            den = 1
            for e in range(inv_power):
                den = den * d
            acc = acc + num / den * w[j]
        out[i] = acc
    return out_arr


def pompeiu_sum(z, zeta, weights, int order):
    return kernel_sum(z, zeta, weights, order - 1, 1)
