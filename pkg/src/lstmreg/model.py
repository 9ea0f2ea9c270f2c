"""Many-to-one LSTM regression model.

The cell follows the standard gated recurrence

    net_u(t) = W_ux x(t) + W_uh h(t-1) + b_u,   u in {i, o, f, ci}
    i, o, f  = sigmoid(net_i), sigmoid(net_o), sigmoid(net_f)
    ci       = tanh(net_ci)
    s(t)     = s(t-1) * f(t) + i(t) * ci(t)
    h(t)     = tanh(s(t)) * o(t)

with zero initial state, and a dense sigmoid head y = sigmoid(W_hy h(l))
read off after the last step.  ``forward``/``backward`` run the unrolled
recurrence through the selected kernel backend; ``cell_step`` is the
reference single-step implementation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import as_vector

# row-major checkpoint and stacking order of the trainable arrays
PARAM_FIELDS = (
    "W_ix", "W_ih", "W_ox", "W_oh", "W_fx", "W_fh", "W_cix", "W_cih",
    "b_i", "b_o", "b_f", "b_ci", "W_hy",
)

# gate order of the stacked kernel arrays
GATES = ("i", "o", "f", "ci")


def _sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class ModelParams:
    """All trainable weights of the model (also used as a gradient container)."""

    W_ix: np.ndarray
    W_ih: np.ndarray
    W_ox: np.ndarray
    W_oh: np.ndarray
    W_fx: np.ndarray
    W_fh: np.ndarray
    W_cix: np.ndarray
    W_cih: np.ndarray
    b_i: np.ndarray
    b_o: np.ndarray
    b_f: np.ndarray
    b_ci: np.ndarray
    W_hy: np.ndarray

    def __post_init__(self):
        for name in PARAM_FIELDS:
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            setattr(self, name, arr)
        n_h, x_dim = self.W_ix.shape
        y_dim = self.W_hy.shape[0]
        for u in GATES:
            wx = getattr(self, f"W_{u}x")
            wh = getattr(self, f"W_{u}h")
            bu = getattr(self, f"b_{u}")
            if wx.shape != (n_h, x_dim):
                raise ValueError(f"W_{u}x has shape {wx.shape}, expected {(n_h, x_dim)}")
            if wh.shape != (n_h, n_h):
                raise ValueError(f"W_{u}h has shape {wh.shape}, expected {(n_h, n_h)}")
            if bu.shape != (n_h,):
                raise ValueError(f"b_{u} has shape {bu.shape}, expected {(n_h,)}")
        if self.W_hy.shape != (y_dim, n_h):
            raise ValueError(f"W_hy has shape {self.W_hy.shape}, expected {(y_dim, n_h)}")
        for name in PARAM_FIELDS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def x_dim(self) -> int:
        return self.W_ix.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W_ix.shape[0]

    @property
    def y_dim(self) -> int:
        return self.W_hy.shape[0]

    def named_arrays(self):
        """Yield (name, array) in the fixed checkpoint order."""
        for name in PARAM_FIELDS:
            yield name, getattr(self, name)

    def copy(self) -> "ModelParams":
        return ModelParams(**{n: a.copy() for n, a in self.named_arrays()})

    @classmethod
    def zeros(cls, x_dim: int, hidden_dim: int, y_dim: int) -> "ModelParams":
        n = hidden_dim
        kw = {}
        for u in GATES:
            kw[f"W_{u}x"] = np.zeros((n, x_dim))
            kw[f"W_{u}h"] = np.zeros((n, n))
            kw[f"b_{u}"] = np.zeros(n)
        kw["W_hy"] = np.zeros((y_dim, n))
        return cls(**kw)

    def zeros_like(self) -> "ModelParams":
        return ModelParams.zeros(self.x_dim, self.hidden_dim, self.y_dim)


# gradients mirror the parameter container exactly
ParamGrads = ModelParams


@dataclass
class LstmState:
    h: np.ndarray
    s: np.ndarray


@dataclass
class StepCache:
    """Everything one timestep recorded: pre-activations, gate values,
    the input, the previous state and the resulting state."""

    net_i: np.ndarray
    net_o: np.ndarray
    net_f: np.ndarray
    net_ci: np.ndarray
    i: np.ndarray
    o: np.ndarray
    f: np.ndarray
    ci: np.ndarray
    co: np.ndarray
    x_t: np.ndarray
    prev: LstmState
    h: np.ndarray
    s: np.ndarray


@dataclass
class Sequence:
    """A window of inputs with the single regression target it maps to."""

    inputs: np.ndarray  # (l, x_dim)
    target: np.ndarray  # (y_dim,)

    def __post_init__(self):
        self.inputs = np.ascontiguousarray(self.inputs, dtype=np.float64)
        self.target = np.ascontiguousarray(self.target, dtype=np.float64)
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise ValueError("inputs must be a non-empty (l, x_dim) array")
        if self.target.ndim != 1:
            raise ValueError("target must be a 1-d vector")

    @property
    def length(self) -> int:
        return self.inputs.shape[0]


class SequenceCaches:
    """Per-sequence forward records, stored as stacked arrays.

    Indexing materializes a ``StepCache`` of views; the stacked arrays are
    what the backward kernel consumes directly.
    """

    def __init__(self, xs, net, gates, s_arr, h_arr, co):
        self.xs = xs
        self.net = net
        self.gates = gates
        self.s_arr = s_arr  # (l+1, n), s_arr[0] = 0
        self.h_arr = h_arr  # (l+1, n), h_arr[0] = 0
        self.co = co

    def __len__(self) -> int:
        return self.xs.shape[0]

    def __getitem__(self, t: int) -> StepCache:
        if not -len(self) <= t < len(self):
            raise IndexError(t)
        t = t % len(self)
        n = self.h_arr.shape[1]
        g = self.gates[t]
        nets = self.net[t]
        return StepCache(
            net_i=nets[:n], net_o=nets[n:2 * n], net_f=nets[2 * n:3 * n],
            net_ci=nets[3 * n:],
            i=g[:n], o=g[n:2 * n], f=g[2 * n:3 * n], ci=g[3 * n:],
            co=self.co[t], x_t=self.xs[t],
            prev=LstmState(h=self.h_arr[t], s=self.s_arr[t]),
            h=self.h_arr[t + 1], s=self.s_arr[t + 1],
        )

    def __iter__(self):
        return (self[t] for t in range(len(self)))


def stack_params(params: ModelParams):
    """Stack the gate matrices into the (4N, .) kernel layout."""
    w_x = np.concatenate([getattr(params, f"W_{u}x") for u in GATES], axis=0)
    w_h = np.concatenate([getattr(params, f"W_{u}h") for u in GATES], axis=0)
    b = np.concatenate([getattr(params, f"b_{u}") for u in GATES])
    return (np.ascontiguousarray(w_x), np.ascontiguousarray(w_h),
            np.ascontiguousarray(b))


def cell_step(params: ModelParams, x_t: np.ndarray,
              prev: LstmState) -> tuple[LstmState, StepCache]:
    """One step of the recurrence; reference implementation."""
    x_t = as_vector(x_t)
    if x_t.shape[0] != params.x_dim:
        raise ValueError(f"input has dim {x_t.shape[0]}, expected {params.x_dim}")
    if prev.h.shape[0] != params.hidden_dim or prev.s.shape[0] != params.hidden_dim:
        raise ValueError("previous state dimension does not match the model")

    net_i = params.W_ix @ x_t + params.W_ih @ prev.h + params.b_i
    net_o = params.W_ox @ x_t + params.W_oh @ prev.h + params.b_o
    net_f = params.W_fx @ x_t + params.W_fh @ prev.h + params.b_f
    net_ci = params.W_cix @ x_t + params.W_cih @ prev.h + params.b_ci
    i = _sigmoid(net_i)
    o = _sigmoid(net_o)
    f = _sigmoid(net_f)
    ci = np.tanh(net_ci)
    s = prev.s * f + i * ci
    co = np.tanh(s)
    h = co * o
    state = LstmState(h=h, s=s)
    cache = StepCache(net_i=net_i, net_o=net_o, net_f=net_f, net_ci=net_ci,
                      i=i, o=o, f=f, ci=ci, co=co, x_t=x_t, prev=prev,
                      h=h, s=s)
    return state, cache


def forward(params: ModelParams,
            seq: Sequence) -> tuple[np.ndarray, SequenceCaches]:
    """Unroll the cell over the whole window and apply the sigmoid head."""
    if seq.inputs.shape[1] != params.x_dim:
        raise ValueError(
            f"sequence inputs have dim {seq.inputs.shape[1]}, expected {params.x_dim}")
    w_x, w_h, b = stack_params(params)
    net, gates, s_arr, h_arr, co = kernels.sequence_forward(w_x, w_h, b, seq.inputs)
    y = _sigmoid(params.W_hy @ h_arr[-1])
    return y, SequenceCaches(seq.inputs, net, gates, s_arr, h_arr, co)


def mse(y: np.ndarray, target: np.ndarray) -> float:
    """Mean over output dimensions of the squared error."""
    y = as_vector(y)
    target = as_vector(target)
    if y.shape != target.shape:
        raise ValueError(f"dimension mismatch: {y.shape[0]} vs {target.shape[0]}")
    d = y - target
    return float(np.mean(d * d))


def backward(params: ModelParams, seq: Sequence, caches: SequenceCaches,
             y: np.ndarray) -> ParamGrads:
    """Gradient of ``mse(forward(params, seq), seq.target)`` w.r.t. every
    parameter, by backpropagation through time over the cached forward."""
    if not isinstance(caches, SequenceCaches):
        raise ValueError("caches must come from forward()")
    if len(caches) != seq.length or caches.xs.shape != seq.inputs.shape \
            or not np.array_equal(caches.xs, seq.inputs):
        raise ValueError("caches do not match the sequence")
    y = as_vector(y)
    if y.shape[0] != params.y_dim:
        raise ValueError(f"output has dim {y.shape[0]}, expected {params.y_dim}")

    h_last = caches.h_arr[-1]
    dy = (2.0 / params.y_dim) * (y - seq.target)
    dz = dy * y * (1.0 - y)  # through the sigmoid head
    d_w_hy = np.outer(dz, h_last)
    dh_last = params.W_hy.T @ dz

    _, w_h, _ = stack_params(params)
    dw_x, dw_h, db = kernels.sequence_backward(
        w_h, caches.xs, caches.gates, caches.s_arr, caches.h_arr, caches.co,
        dh_last)

    n = params.hidden_dim
    kw = {}
    for k, u in enumerate(GATES):
        kw[f"W_{u}x"] = dw_x[k * n:(k + 1) * n]
        kw[f"W_{u}h"] = dw_h[k * n:(k + 1) * n]
        kw[f"b_{u}"] = db[k * n:(k + 1) * n]
    kw["W_hy"] = d_w_hy
    return ParamGrads(**kw)


def init_params(x_dim: int, hidden_dim: int, y_dim: int,
                rng: np.random.Generator) -> ModelParams:
    """Uniform [-r, r] initialization with r = 1/sqrt(fan-in).

    W_oh is rescaled afterwards, if needed, so the recurrent output gate
    satisfies the stability condition beta * ||W_oh|| <= 0.9 from step zero.
    """
    from .regularizer import BETA  # deferred: regularizer imports this module
    from .linalg import spectral_norm

    n = hidden_dim
    r_x = 1.0 / np.sqrt(x_dim)
    r_h = 1.0 / np.sqrt(n)
    kw = {}
    for u in GATES:
        kw[f"W_{u}x"] = rng.uniform(-r_x, r_x, size=(n, x_dim))
        kw[f"W_{u}h"] = rng.uniform(-r_h, r_h, size=(n, n))
        kw[f"b_{u}"] = np.zeros(n)
    kw["W_hy"] = rng.uniform(-r_h, r_h, size=(y_dim, n))
    norm_oh = spectral_norm(kw["W_oh"]).value
    if BETA * norm_oh > 0.9:
        kw["W_oh"] = kw["W_oh"] * (0.9 / (BETA * norm_oh))
    return ModelParams(**kw)


def batch_mse(params: ModelParams, sequences) -> float:
    """Mean of per-sequence MSE over a batch."""
    if not sequences:
        raise ValueError("empty batch")
    total = 0.0
    for seq in sequences:
        y, _ = forward(params, seq)
        total += mse(y, seq.target)
    return total / len(sequences)
