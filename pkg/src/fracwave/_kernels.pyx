# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: tabulated Mittag-Leffler evaluation and the
history summation of the mild-solution scheme."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport log, exp, pow, sin, cos, M_PI

cnp.import_array()

DEF BLOCK = 2048


def ml_table_eval(double[::1] x, double x_lo, double x_hi,
                  double[::1] series_coef, double[::1] asym_coef,
                  double y0, double h, double[:, ::1] cheb,
                  double alpha, double beta, bint has_residue):
    cdef Py_ssize_t n = x.shape[0], i, k, p
    cdef Py_ssize_t ns = series_coef.shape[0], na = asym_coef.shape[0]
    cdef Py_ssize_t npan = cheb.shape[0], deg = cheb.shape[1] - 1
    cdef double xi, acc, inv, y, t, b1, b2, tmp, s, phase
    cdef double sa = sin(M_PI / alpha), ca = cos(M_PI / alpha)
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    for i in range(n):
        xi = x[i]
        if xi <= x_lo:
            acc = 0.0
            for k in range(ns - 1, -1, -1):
                acc = acc * xi + series_coef[k]
            out[i] = acc
            continue
        if xi >= x_hi:
            inv = 1.0 / xi
            acc = 0.0
            for k in range(na - 1, -1, -1):
                acc = (acc + asym_coef[k]) * inv
        else:
            y = log(xi)
            p = <Py_ssize_t>((y - y0) / h)
            if p < 0:
                p = 0
            elif p >= npan:
                p = npan - 1
            t = 2.0 * (y - y0 - p * h) / h - 1.0
            b1 = 0.0
            b2 = 0.0
            for k in range(deg, 0, -1):
                tmp = 2.0 * t * b1 - b2 + cheb[p, k]
                b2 = b1
                b1 = tmp
            acc = t * b1 - b2 + cheb[p, 0]
        if has_residue:
            s = pow(xi, 1.0 / alpha)
            phase = (1.0 - beta) * M_PI / alpha + s * sa
            acc += 2.0 / alpha * pow(s, 1.0 - beta) * exp(s * ca) * cos(phase)
        out[i] = acc
    return out_arr


def history_accumulate(double[:, ::1] weights, cnp.intp_t[::1] index,
                       history, out, int num_threads=1):
    """out[m] += sum_j weights[j, index[m]] * history[j, m], j ascending for every m."""
    cdef double[:, ::1] h = history.view(np.float64)
    cdef double[::1] o = out.view(np.float64)
    cdef Py_ssize_t nj = weights.shape[0], nm = index.shape[0]
    cdef Py_ssize_t blk, j, m, m0, m1, nblk = (nm + BLOCK - 1) // BLOCK
    cdef double w
    for blk in prange(nblk, nogil=True, num_threads=num_threads, schedule="static"):
        m0 = blk * BLOCK
        m1 = m0 + BLOCK
        if m1 > nm:
            m1 = nm
        for j in range(nj):
            for m in range(m0, m1):
                w = weights[j, index[m]]
                o[2 * m] = o[2 * m] + w * h[j, 2 * m]
                o[2 * m + 1] = o[2 * m + 1] + w * h[j, 2 * m + 1]
    return out
