"""Independent reference implementations used by the tests.

Everything here is written against the math module with explicit scalar
loops, on purpose: these oracles must not share code paths with the
package they check.
"""

import math

import numpy as np


def sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def scalar_lstm_forward(params, xs):
    """Unroll the recurrence with scalar arithmetic only.

    params is a ModelParams; xs a list of input lists.  Returns the output
    list and the full per-step (h, s) history.
    """
    n = params.hidden_dim
    x_dim = params.x_dim
    h = [0.0] * n
    s = [0.0] * n
    history = []
    W = {name: arr.tolist() for name, arr in params.named_arrays()}

    def affine(wx, wh, b, x):
        out = []
        for j in range(n):
            acc = b[j]
            for k in range(x_dim):
                acc += wx[j][k] * x[k]
            for k in range(n):
                acc += wh[j][k] * h[k]
            out.append(acc)
        return out

    for x in xs:
        net_i = affine(W["W_ix"], W["W_ih"], W["b_i"], x)
        net_o = affine(W["W_ox"], W["W_oh"], W["b_o"], x)
        net_f = affine(W["W_fx"], W["W_fh"], W["b_f"], x)
        net_ci = affine(W["W_cix"], W["W_cih"], W["b_ci"], x)
        i = [sigmoid(v) for v in net_i]
        o = [sigmoid(v) for v in net_o]
        f = [sigmoid(v) for v in net_f]
        ci = [math.tanh(v) for v in net_ci]
        s = [s[j] * f[j] + i[j] * ci[j] for j in range(n)]
        h = [math.tanh(s[j]) * o[j] for j in range(n)]
        history.append((list(h), list(s)))

    y = []
    for row in W["W_hy"]:
        acc = 0.0
        for j in range(n):
            acc += row[j] * h[j]
        y.append(sigmoid(acc))
    return y, history


def top_singular_value(w):
    """Largest singular value via eigendecomposition of W^T W."""
    w = np.asarray(w, dtype=np.float64)
    evals = np.linalg.eigvalsh(w.T @ w)
    return float(np.sqrt(max(evals[-1], 0.0)))


def singular_gap(w):
    """Difference between the two largest singular values."""
    svals = np.linalg.svd(np.asarray(w, dtype=np.float64), compute_uv=False)
    if len(svals) < 2:
        return float(svals[0])
    return float(svals[0] - svals[1])


def grad_check(analytic, fd, floor_scale):
    """Worst relative error between two gradient arrays.

    Entries far below the overall gradient scale are compared against
    ``1e-4 * floor_scale`` absolutely, since central differences bottom out
    at roundoff there.
    """
    floor = max(1e-4 * floor_scale, 1e-12)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), floor)
    return float(np.max(np.abs(analytic - fd) / denom))


def central_difference(f, params, step):
    """Gradient of the scalar function f over every entry of a ModelParams."""
    out = params.zeros_like()
    for name, arr in params.named_arrays():
        target = getattr(out, name)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            plus = params.copy()
            getattr(plus, name)[idx] += step
            minus = params.copy()
            getattr(minus, name)[idx] -= step
            target[idx] = (f(plus) - f(minus)) / (2.0 * step)
    return out
