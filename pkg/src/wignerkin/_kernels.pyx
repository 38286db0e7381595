# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the grid kernels in ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, floor, M_PI

cnp.import_array()


def cat_grid(const double[::1] xs, const double[::1] ps, double x0, double p0,
             double shear, double scale):
    cdef Py_ssize_t nx = xs.shape[0], np_ = ps.shape[0], i, j
    out = np.empty((nx, np_), dtype=np.float64)
    cdef double[:, ::1] w = out
    cdef double X, P, pre = scale / M_PI
    cdef double ea, eb
    for i in range(nx):
        for j in range(np_):
            P = ps[j]
            X = xs[i] - shear * P
            ea = exp(-(P - p0) * (P - p0) - (X - x0) * (X - x0))
            eb = exp(-(P + p0) * (P + p0) - (X + x0) * (X + x0))
            w[i, j] = pre * (ea + eb + 2.0 * exp(-X * X - P * P)
                             * cos(2.0 * (p0 * X - P * x0)))
    return out


def gauss_grid(const double[::1] xs, const double[::1] ps, double x0, double p0,
               double shear, double scale):
    cdef Py_ssize_t nx = xs.shape[0], np_ = ps.shape[0], i, j
    out = np.empty((nx, np_), dtype=np.float64)
    cdef double[:, ::1] w = out
    cdef double X, P, pre = scale / M_PI
    for i in range(nx):
        for j in range(np_):
            P = ps[j]
            X = xs[i] - shear * P
            w[i, j] = pre * exp(-(P - p0) * (P - p0) - (X - x0) * (X - x0))
    return out


cdef inline double _bilinear(const double[:, ::1] v, Py_ssize_t nx, Py_ssize_t np_,
                             double fi, double fj) nogil:
    cdef Py_ssize_t i, j
    cdef double a, b
    if fi < 0.0 or fi > nx - 1 or fj < 0.0 or fj > np_ - 1:
        return 0.0
    i = <Py_ssize_t>floor(fi)
    j = <Py_ssize_t>floor(fj)
    if i > nx - 2:
        i = nx - 2
    if j > np_ - 2:
        j = np_ - 2
    a = fi - i
    b = fj - j
    return ((1.0 - a) * ((1.0 - b) * v[i, j] + b * v[i, j + 1])
            + a * ((1.0 - b) * v[i + 1, j] + b * v[i + 1, j + 1]))


def line_integrals(values, double x_min, double dx, double p_min, double dp,
                   q, u, wu, double c, double s):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] qv = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(wu, dtype=np.float64)
    cdef Py_ssize_t nx = v.shape[0], np_ = v.shape[1]
    cdef Py_ssize_t nq = qv.shape[0], nu = uv.shape[0], k, m
    out = np.empty(nq, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc, qc, qs
    with nogil:
        for k in range(nq):
            qc = qv[k] * c
            qs = qv[k] * s
            acc = 0.0
            for m in range(nu):
                acc = acc + wv[m] * _bilinear(
                    v, nx, np_, (qc - uv[m] * s - x_min) / dx,
                    (qs + uv[m] * c - p_min) / dp)
            o[k] = acc
    return out
