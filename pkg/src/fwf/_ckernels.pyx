# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; signature-compatible with fwf._pykernels.

Plain sequential C loops: summation order matches the naive
double-loop references used by the test oracles.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()


def autocorr_sums(x, int L, double sigma):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double inv = 0.5 / (sigma * sigma)
    out = np.zeros(L)
    cdef double[::1] ov = out
    cdef Py_ssize_t tau, t
    cdef double acc, d
    for tau in range(L):
        if tau >= n:
            continue
        acc = 0.0
        for t in range(tau, n):
            d = xv[t] - xv[t - tau]
            acc += exp(-inv * d * d)
        ov[tau] = acc
    return out


def crosscorr_sums(x, z, int L, double sigma):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double inv = 0.5 / (sigma * sigma)
    out = np.zeros(L)
    cdef double[::1] ov = out
    cdef Py_ssize_t tau, t
    cdef double acc, d
    for tau in range(L):
        if tau >= n:
            continue
        acc = 0.0
        for t in range(tau, n):
            d = xv[t - tau] - zv[t]
            acc += exp(-inv * d * d)
        ov[tau] = acc
    return out


def mean_kernel_sum(x, double sigma):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef double inv = 0.5 / (sigma * sigma)
    cdef double total = 0.0, row, d
    cdef Py_ssize_t t, s
    for t in range(n):
        row = 0.0
        for s in range(n):
            d = xv[t] - xv[s]
            row += exp(-inv * d * d)
        total += row
    return total


def local_index_search(windows, targets, w, double sigma):
    cdef double[:, ::1] wv = np.ascontiguousarray(windows, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(targets, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0]
    cdef Py_ssize_t L = wv.shape[1]
    cdef double inv = 0.5 / (sigma * sigma)
    partners = np.empty(n, dtype=np.int64)
    zhat = np.empty(n)
    cdef long long[::1] pv = partners
    cdef double[::1] hv = zhat
    cdef Py_ssize_t i, m, tau, best
    cdef double approx, gap, best_gap, best_val, d
    for i in range(n):
        best = 0
        best_gap = -1.0
        best_val = 0.0
        for m in range(n):
            approx = 0.0
            for tau in range(L):
                d = wv[i, tau] - wv[m, tau]
                approx += cv[tau] * exp(-inv * d * d)
            gap = fabs(zv[i] - approx)
            if best_gap < 0.0 or gap < best_gap:
                best_gap = gap
                best = m
                best_val = approx
        pv[i] = best
        hv[i] = best_val
    return partners, zhat


def weighted_window_eval(center, window, w, double sigma):
    cdef double[::1] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(window, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double inv = 0.5 / (sigma * sigma)
    cdef double acc = 0.0, d
    cdef Py_ssize_t tau
    for tau in range(c.shape[0]):
        d = c[tau] - x[tau]
        acc += cv[tau] * exp(-inv * d * d)
    return acc


def functional_eval(window, w, double sigma, double y):
    cdef double[::1] x = np.ascontiguousarray(window, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double inv = 0.5 / (sigma * sigma)
    cdef double acc = 0.0, d
    cdef Py_ssize_t tau
    for tau in range(x.shape[0]):
        d = x[tau] - y
        acc += cv[tau] * exp(-inv * d * d)
    return acc


def fp_iterate(window, w, double sigma, double y0, double tol, int max_iters,
               double denom_floor=1e-12):
    cdef double[::1] x = np.ascontiguousarray(window, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t L = x.shape[0]
    cdef double inv = 0.5 / (sigma * sigma)
    traj = np.empty(max_iters)
    cdef double[::1] tv = traj
    cdef double y = y0, num, denom, g, d, y_next
    cdef bint converged = False, degenerate = False
    cdef int iters = 0
    cdef Py_ssize_t tau
    while iters < max_iters:
        num = 0.0
        denom = 0.0
        for tau in range(L):
            d = x[tau] - y
            g = cv[tau] * exp(-inv * d * d)
            denom += g
            num += g * x[tau]
        if fabs(denom) < denom_floor:
            degenerate = True
            break
        y_next = num / denom
        tv[iters] = y_next
        iters += 1
        if fabs(y_next - y) < tol:
            y = y_next
            converged = True
            break
        y = y_next
    return y, iters, converged, degenerate, traj[:iters]


def kernel_sum_eval(centers, coeffs, window, double sigma):
    cdef double[:, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(window, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t L = c.shape[1]
    cdef double inv = 0.5 / (sigma * sigma)
    cdef double acc = 0.0, sq, d
    cdef Py_ssize_t i, tau
    for i in range(n):
        sq = 0.0
        for tau in range(L):
            d = c[i, tau] - x[tau]
            sq += d * d
        acc += a[i] * exp(-inv * sq)
    return acc


def kernel_sum_eval_batch(centers, coeffs, windows, double sigma):
    cdef double[:, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef double[:, ::1] q = np.ascontiguousarray(windows, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t L = c.shape[1]
    cdef Py_ssize_t T = q.shape[0]
    cdef double inv = 0.5 / (sigma * sigma)
    out = np.zeros(T)
    cdef double[::1] ov = out
    cdef double acc, sq, d
    cdef Py_ssize_t t, i, tau
    for t in range(T):
        acc = 0.0
        for i in range(n):
            sq = 0.0
            for tau in range(L):
                d = c[i, tau] - q[t, tau]
                sq += d * d
            acc += a[i] * exp(-inv * sq)
        ov[t] = acc
    return out


def klms_train(windows, targets, double eta, double sigma):
    cdef double[:, ::1] wnd = np.ascontiguousarray(windows, dtype=np.float64)
    cdef double[::1] zv = np.ascontiguousarray(targets, dtype=np.float64)
    cdef Py_ssize_t n = wnd.shape[0]
    cdef Py_ssize_t L = wnd.shape[1]
    cdef double inv = 0.5 / (sigma * sigma)
    coeffs = np.empty(n)
    cdef double[::1] av = coeffs
    cdef Py_ssize_t t, i, tau
    cdef double y, sq, d
    for t in range(n):
        y = 0.0
        for i in range(t):
            sq = 0.0
            for tau in range(L):
                d = wnd[i, tau] - wnd[t, tau]
                sq += d * d
            y += av[i] * exp(-inv * sq)
        av[t] = eta * (zv[t] - y)
    return coeffs
