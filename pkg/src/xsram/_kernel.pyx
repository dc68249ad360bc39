# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bit-line integration kernel; same contract as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs

cnp.import_array()

IMPL = "cython"


cdef inline double _current(double vgs, double vds, double vt, double w,
                            double k, double alpha, double derate) nogil:
    cdef double vov = vgs - vt
    cdef double isat
    if vov <= 0.0 or vds <= 0.0:
        return 0.0
    isat = k * w * pow(vov, alpha) * derate
    if vds < vov:
        return isat * vds / vov
    return isat


cdef inline double _chain(double v, double rail, int ndev,
                          double g_n, double vt_n, double w_n,
                          double g_f, double vt_f, double w_f,
                          double k, double alpha, double derate,
                          int n_bisect) nogil:
    cdef double hi, lo, a, b, x, i_top, i_bot, cur
    cdef double g_top, vt_top, w_top, g_bot, vt_bot, w_bot
    cdef bint node_high = v >= rail
    cdef int it
    if ndev == 0:
        return 0.0
    if node_high:
        hi = v
        lo = rail
        g_top = g_n; vt_top = vt_n; w_top = w_n
        g_bot = g_f; vt_bot = vt_f; w_bot = w_f
    else:
        hi = rail
        lo = v
        g_top = g_f; vt_top = vt_f; w_top = w_f
        g_bot = g_n; vt_bot = vt_n; w_bot = w_n
    if ndev == 1:
        cur = _current(g_n - lo, hi - lo, vt_n, w_n, k, alpha, derate)
    elif g_top - lo <= vt_top or g_bot - lo <= vt_bot or hi <= lo:
        # either device is off at every internal-node voltage
        cur = 0.0
    else:
        a = lo
        b = hi
        for it in range(n_bisect):
            x = 0.5 * (a + b)
            i_top = _current(g_top - x, hi - x, vt_top, w_top, k, alpha, derate)
            i_bot = _current(g_bot - lo, x - lo, vt_bot, w_bot, k, alpha, derate)
            if i_top > i_bot:
                a = x
            else:
                b = x
        x = 0.5 * (a + b)
        i_top = _current(g_top - x, hi - x, vt_top, w_top, k, alpha, derate)
        i_bot = _current(g_bot - lo, x - lo, vt_bot, w_bot, k, alpha, derate)
        cur = i_top if i_top < i_bot else i_bot
    if node_high:
        return -cur
    return cur


def integrate(v0, rail, ndev, g_n, vt_n, w_n, g_f, vt_f, w_f,
              int nsteps, double dt, double c_node, double k, double alpha,
              double derate, double vmin, double vmax, double max_dv,
              int n_bisect, bint record):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.array(v0, dtype=np.float64, copy=True)
    cdef double[:, ::1] r_ = np.ascontiguousarray(rail, dtype=np.float64)
    cdef signed char[:, ::1] nd_ = np.ascontiguousarray(ndev, dtype=np.int8)
    cdef double[:, ::1] gn_ = np.ascontiguousarray(g_n, dtype=np.float64)
    cdef double[:, ::1] vtn_ = np.ascontiguousarray(vt_n, dtype=np.float64)
    cdef double[:, ::1] wn_ = np.ascontiguousarray(w_n, dtype=np.float64)
    cdef double[:, ::1] gf_ = np.ascontiguousarray(g_f, dtype=np.float64)
    cdef double[:, ::1] vtf_ = np.ascontiguousarray(vt_f, dtype=np.float64)
    cdef double[:, ::1] wf_ = np.ascontiguousarray(w_f, dtype=np.float64)
    cdef Py_ssize_t n_nodes = v.shape[0]
    cdef Py_ssize_t n_paths = r_.shape[1]
    cdef double[::1] vv = v
    cdef double[:, ::1] tr
    cdef double scale = dt / c_node
    cdef double i_in, dv, nv
    cdef Py_ssize_t n, p
    cdef int step
    cdef int bad = -1

    trace = None
    if record:
        trace = np.empty((nsteps + 1, n_nodes), dtype=np.float64)
        tr = trace
        for n in range(n_nodes):
            tr[0, n] = vv[n]

    with nogil:
        for n in range(n_nodes):
            for step in range(nsteps):
                i_in = 0.0
                for p in range(n_paths):
                    i_in = i_in + _chain(vv[n], r_[n, p], nd_[n, p],
                                         gn_[n, p], vtn_[n, p], wn_[n, p],
                                         gf_[n, p], vtf_[n, p], wf_[n, p],
                                         k, alpha, derate, n_bisect)
                dv = i_in * scale
                if fabs(dv) > max_dv and (bad < 0 or step < bad):
                    bad = step
                nv = vv[n] + dv
                if nv < vmin:
                    nv = vmin
                elif nv > vmax:
                    nv = vmax
                vv[n] = nv
                if record:
                    tr[step + 1, n] = nv
    return v, trace, bad
