# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled correlation kernels.

Same contract as ``_kernels_py``; the loops fuse distance, phase and
accumulation so no (points x elements) temporaries are allocated.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, sin, cos

cnp.import_array()


def correlate(ex, ez, weights, double k, r, phi):
    cdef const double[::1] ex_v = np.ascontiguousarray(ex, dtype=np.float64)
    cdef const double[::1] ez_v = np.ascontiguousarray(ez, dtype=np.float64)
    cdef const double complex[::1] w_v = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef const double[::1] r_v = np.ascontiguousarray(np.atleast_1d(r), dtype=np.float64)
    cdef const double[::1] p_v = np.ascontiguousarray(np.atleast_1d(phi), dtype=np.float64)
    cdef Py_ssize_t n_el = ex_v.shape[0]
    cdef Py_ssize_t n_pt = r_v.shape[0]
    if w_v.shape[0] != n_el or ez_v.shape[0] != n_el:
        raise ValueError("element arrays and weights must have equal length")
    if p_v.shape[0] != n_pt:
        raise ValueError("r and phi must have equal length")
    out = np.empty(n_pt, dtype=np.complex128)
    cdef double complex[::1] out_v = out
    cdef Py_ssize_t m, n
    cdef double x, y2, dx, d, ph, c, s, acc_re, acc_im, wr, wi
    for m in range(n_pt):
        x = r_v[m] * cos(p_v[m])
        y2 = r_v[m] * sin(p_v[m])
        y2 = y2 * y2
        acc_re = 0.0
        acc_im = 0.0
        for n in range(n_el):
            dx = x - ex_v[n]
            d = sqrt(dx * dx + y2 + ez_v[n] * ez_v[n])
            ph = k * d
            c = cos(ph)
            s = sin(ph)
            wr = w_v[n].real
            wi = w_v[n].imag
            acc_re = acc_re + c * wr - s * wi
            acc_im = acc_im + c * wi + s * wr
        out_v[m] = acc_re + 1j * acc_im
    return out


def pair_gains(ex, ez, double k, r1, phi1, r2, phi2):
    cdef const double[::1] ex_v = np.ascontiguousarray(ex, dtype=np.float64)
    cdef const double[::1] ez_v = np.ascontiguousarray(ez, dtype=np.float64)
    cdef const double[::1] r1_v = np.ascontiguousarray(np.atleast_1d(r1), dtype=np.float64)
    cdef const double[::1] p1_v = np.ascontiguousarray(np.atleast_1d(phi1), dtype=np.float64)
    cdef const double[::1] r2_v = np.ascontiguousarray(np.atleast_1d(r2), dtype=np.float64)
    cdef const double[::1] p2_v = np.ascontiguousarray(np.atleast_1d(phi2), dtype=np.float64)
    cdef Py_ssize_t n_el = ex_v.shape[0]
    cdef Py_ssize_t n_pt = r1_v.shape[0]
    if ez_v.shape[0] != n_el:
        raise ValueError("element arrays must have equal length")
    if p1_v.shape[0] != n_pt or r2_v.shape[0] != n_pt or p2_v.shape[0] != n_pt:
        raise ValueError("position arrays must have equal length")
    out = np.empty(n_pt, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t m, n
    cdef double x1, y1, x2, y2, dx, ez2, d1, d2, ph, acc_re, acc_im
    cdef double norm = <double>n_el * <double>n_el
    for m in range(n_pt):
        x1 = r1_v[m] * cos(p1_v[m])
        y1 = r1_v[m] * sin(p1_v[m])
        x2 = r2_v[m] * cos(p2_v[m])
        y2 = r2_v[m] * sin(p2_v[m])
        y1 = y1 * y1
        y2 = y2 * y2
        acc_re = 0.0
        acc_im = 0.0
        for n in range(n_el):
            ez2 = ez_v[n] * ez_v[n]
            dx = x1 - ex_v[n]
            d1 = sqrt(dx * dx + y1 + ez2)
            dx = x2 - ex_v[n]
            d2 = sqrt(dx * dx + y2 + ez2)
            ph = k * (d1 - d2)
            acc_re = acc_re + cos(ph)
            acc_im = acc_im + sin(ph)
        out_v[m] = (acc_re * acc_re + acc_im * acc_im) / norm
    return out
