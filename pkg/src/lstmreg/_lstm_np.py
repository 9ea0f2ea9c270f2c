"""Numpy implementation of the sequence-level LSTM kernels.

Fallback backend with the same contract as the compiled extension, see
``kernels`` for the layout of the stacked gate arrays.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sequence_forward(w_x, w_h, b, xs):
    l, _ = xs.shape
    four_n = b.shape[0]
    n = four_n // 4

    net = np.empty((l, four_n))
    gates = np.empty((l, four_n))
    s_arr = np.zeros((l + 1, n))
    h_arr = np.zeros((l + 1, n))
    co = np.empty((l, n))

    for t in range(l):
        pre = w_x @ xs[t] + w_h @ h_arr[t] + b
        net[t] = pre
        gates[t, : 3 * n] = _sigmoid(pre[: 3 * n])
        gates[t, 3 * n :] = np.tanh(pre[3 * n :])
        i = gates[t, :n]
        o = gates[t, n : 2 * n]
        f = gates[t, 2 * n : 3 * n]
        ci = gates[t, 3 * n :]
        s_arr[t + 1] = s_arr[t] * f + i * ci
        co[t] = np.tanh(s_arr[t + 1])
        h_arr[t + 1] = co[t] * o
    return net, gates, s_arr, h_arr, co


def sequence_backward(w_h, xs, gates, s_arr, h_arr, co, dh_last):
    l, x_dim = xs.shape
    four_n = gates.shape[1]
    n = four_n // 4

    dw_x = np.zeros((four_n, x_dim))
    dw_h = np.zeros((four_n, n))
    db = np.zeros(four_n)
    dnet = np.empty(four_n)

    dh = dh_last.copy()
    ds = np.zeros(n)
    for t in range(l - 1, -1, -1):
        i = gates[t, :n]
        o = gates[t, n : 2 * n]
        f = gates[t, 2 * n : 3 * n]
        ci = gates[t, 3 * n :]

        do = dh * co[t]
        ds += dh * o * (1.0 - co[t] * co[t])

        dnet[:n] = ds * ci * i * (1.0 - i)
        dnet[n : 2 * n] = do * o * (1.0 - o)
        dnet[2 * n : 3 * n] = ds * s_arr[t] * f * (1.0 - f)
        dnet[3 * n :] = ds * i * (1.0 - ci * ci)

        dw_x += np.outer(dnet, xs[t])
        dw_h += np.outer(dnet, h_arr[t])
        db += dnet

        dh = w_h.T @ dnet
        ds *= f
    return dw_x, dw_h, db
