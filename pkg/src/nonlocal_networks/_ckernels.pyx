# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-step kernels; same contracts as ``_pykernels``."""
import numpy as np

cimport numpy as cnp

cnp.import_array()

ONE_TO_ONE = 0
ONE_TO_TWO_MAXFLUX = 1
ONE_TO_TWO_DISTRIBUTION = 2
TWO_TO_ONE_MAXFLUX = 3
TWO_TO_ONE_PRIORITY = 4


cdef inline double dmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double dmax(double a, double b) nogil:
    return a if a > b else b


def lookahead(const double[::1] w_ext, const double[::1] gamma, Py_ssize_t n):
    cdef Py_ssize_t m = gamma.shape[0]
    if w_ext.shape[0] < n + m:
        raise IndexError("lookahead window runs past the supplied data")
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = out
    cdef Py_ssize_t i, k
    cdef double g
    with nogil:
        # k outermost so the inner loop runs over independent outputs and vectorises
        for k in range(m):
            g = gamma[k]
            for i in range(n):
                v[i] += g * w_ext[i + k + 1]
    return out


def coupling(int tag, const double[::1] rho, const double[::1] va, const double[::1] vb, params):
    cdef double rmax_a = params[0], rmax_b = params[1]
    cdef double alpha_a = params[2], alpha_b = params[3]
    cdef double q_self = params[4], q_other = params[5], rho_other = params[6]
    cdef Py_ssize_t n = rho.shape[0], i
    if tag < 0 or tag > 4:
        raise ValueError(f"unknown coupling tag {tag}")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] g = out
    cdef double cap
    with nogil:
        if tag == 0:
            for i in range(n):
                g[i] = dmin(rho[i], rmax_a) * va[i]
        elif tag == 1:
            for i in range(n):
                g[i] = dmin(alpha_a * rho[i], rmax_a) * va[i] + dmin(alpha_b * rho[i], rmax_b) * vb[i]
        elif tag == 2:
            for i in range(n):
                g[i] = dmin(rho[i] * (alpha_a * va[i] + alpha_b * vb[i]),
                            dmin(rmax_a * va[i] / alpha_a, rmax_b * vb[i] / alpha_b))
        elif tag == 3:
            cap = dmax(q_self * rmax_a, rmax_a - rho_other)
            for i in range(n):
                g[i] = dmin(rho[i], cap) * va[i]
        else:
            cap = dmin(q_self * rmax_a, q_self / q_other * rho_other)
            for i in range(n):
                g[i] = dmin(rho[i], cap) * va[i]
    return out


def godunov_interior(const double[::1] rho, double v_max, double rho_max):
    cdef Py_ssize_t n = rho.shape[0], i
    cdef double sigma = 0.5 * rho_max
    cdef double fmax = sigma * v_max * (1.0 - sigma / rho_max)
    cdef double fl, fr, d, s
    out = np.empty(max(n - 1, 0), dtype=np.float64)
    cdef double[::1] flux = out
    with nogil:
        for i in range(n - 1):
            fl = rho[i] * v_max * (1.0 - rho[i] / rho_max)
            fr = rho[i + 1] * v_max * (1.0 - rho[i + 1] / rho_max)
            d = fl if rho[i] <= sigma else fmax
            s = fmax if rho[i + 1] <= sigma else fr
            flux[i] = dmin(d, s)
    return out


def update(const double[::1] rho, double influx, const double[::1] flux, double lam):
    cdef Py_ssize_t n = rho.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] r = out
    with nogil:
        r[0] = rho[0] - lam * (flux[0] - influx)
        for i in range(1, n):
            r[i] = rho[i] - lam * (flux[i] - flux[i - 1])
    return out
