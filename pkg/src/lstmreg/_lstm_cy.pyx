# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sequence-level LSTM kernels.

Same contract as the numpy backend in ``_lstm_np``; see ``kernels`` for the
stacked array layout.  The per-timestep loops are written out by hand so the
whole sequence runs without interpreter overhead.
"""

import numpy as np

from libc.math cimport exp, tanh


cdef inline double sigmoid(double x) nogil:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double e = exp(x)
    return e / (1.0 + e)


def sequence_forward(double[:, ::1] w_x, double[:, ::1] w_h,
                     double[::1] b, double[:, ::1] xs):
    cdef Py_ssize_t l = xs.shape[0]
    cdef Py_ssize_t x_dim = xs.shape[1]
    cdef Py_ssize_t four_n = b.shape[0]
    cdef Py_ssize_t n = four_n // 4

    net_arr = np.empty((l, four_n))
    gates_arr = np.empty((l, four_n))
    s_out = np.zeros((l + 1, n))
    h_out = np.zeros((l + 1, n))
    co_arr = np.empty((l, n))

    cdef double[:, ::1] net = net_arr
    cdef double[:, ::1] gates = gates_arr
    cdef double[:, ::1] s = s_out
    cdef double[:, ::1] h = h_out
    cdef double[:, ::1] co = co_arr

    cdef Py_ssize_t t, j, k
    cdef double acc
    with nogil:
        for t in range(l):
            for j in range(four_n):
                acc = b[j]
                for k in range(x_dim):
                    acc += w_x[j, k] * xs[t, k]
                for k in range(n):
                    acc += w_h[j, k] * h[t, k]
                net[t, j] = acc
                if j < 3 * n:
                    gates[t, j] = sigmoid(acc)
                else:
                    gates[t, j] = tanh(acc)
            for j in range(n):
                s[t + 1, j] = s[t, j] * gates[t, 2 * n + j] \
                    + gates[t, j] * gates[t, 3 * n + j]
                co[t, j] = tanh(s[t + 1, j])
                h[t + 1, j] = co[t, j] * gates[t, n + j]
    return net_arr, gates_arr, s_out, h_out, co_arr


def sequence_backward(double[:, ::1] w_h, double[:, ::1] xs,
                      double[:, ::1] gates, double[:, ::1] s,
                      double[:, ::1] h, double[:, ::1] co,
                      double[::1] dh_last):
    cdef Py_ssize_t l = xs.shape[0]
    cdef Py_ssize_t x_dim = xs.shape[1]
    cdef Py_ssize_t four_n = gates.shape[1]
    cdef Py_ssize_t n = four_n // 4

    dw_x_arr = np.zeros((four_n, x_dim))
    dw_h_arr = np.zeros((four_n, n))
    db_arr = np.zeros(four_n)

    cdef double[:, ::1] dw_x = dw_x_arr
    cdef double[:, ::1] dw_h = dw_h_arr
    cdef double[::1] db = db_arr

    dh_arr = np.array(dh_last, copy=True)
    ds_arr = np.zeros(n)
    dnet_arr = np.empty(four_n)
    dh_next_arr = np.empty(n)
    cdef double[::1] dh = dh_arr
    cdef double[::1] ds = ds_arr
    cdef double[::1] dnet = dnet_arr
    cdef double[::1] dh_next = dh_next_arr

    cdef Py_ssize_t t, j, k
    cdef double gi, go, gf, gci, d, acc
    with nogil:
        for t in range(l - 1, -1, -1):
            for j in range(n):
                gi = gates[t, j]
                go = gates[t, n + j]
                gf = gates[t, 2 * n + j]
                gci = gates[t, 3 * n + j]
                d = ds[j] + dh[j] * go * (1.0 - co[t, j] * co[t, j])
                dnet[j] = d * gci * gi * (1.0 - gi)
                dnet[n + j] = dh[j] * co[t, j] * go * (1.0 - go)
                dnet[2 * n + j] = d * s[t, j] * gf * (1.0 - gf)
                dnet[3 * n + j] = d * gi * (1.0 - gci * gci)
                ds[j] = d * gf
            for j in range(four_n):
                d = dnet[j]
                for k in range(x_dim):
                    dw_x[j, k] += d * xs[t, k]
                for k in range(n):
                    dw_h[j, k] += d * h[t, k]
                db[j] += d
            for k in range(n):
                acc = 0.0
                for j in range(four_n):
                    acc += w_h[j, k] * dnet[j]
                dh_next[k] = acc
            for k in range(n):
                dh[k] = dh_next[k]
    return dw_x_arr, dw_h_arr, db_arr
