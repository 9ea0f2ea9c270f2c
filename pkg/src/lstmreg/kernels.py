"""Backend selection for the sequence-level LSTM kernels.

Both backends expose the same two functions over stacked gate arrays.  The
four gate blocks are concatenated row-wise in the order ``i, o, f, ci``:

  ``sequence_forward(w_x, w_h, b, xs)``
      w_x (4N, X), w_h (4N, N), b (4N,), xs (l, X) ->
      net (l, 4N), gates (l, 4N), s (l+1, N), h (l+1, N), co (l, N)
      with s[0] = h[0] = 0, gates holding sigmoid(net) for the i/o/f
      blocks and tanh(net) for the ci block, co = tanh(s(t)).

  ``sequence_backward(w_h, xs, gates, s, h, co, dh_last)``
      -> dw_x (4N, X), dw_h (4N, N), db (4N,)
      gradients of any scalar whose gradient w.r.t. h(l) is dh_last.

The compiled extension is preferred; ``LSTMREG_KERNEL=numpy`` (or
``cython``) in the environment forces a backend.
"""

from __future__ import annotations

import os

_forced = os.environ.get("LSTMREG_KERNEL", "").strip().lower()

if _forced == "numpy":
    from . import _lstm_np as _impl

    BACKEND = "numpy"
elif _forced == "cython":
    from . import _lstm_cy as _impl  # raises if the extension was not built

    BACKEND = "cython"
else:
    try:
        from . import _lstm_cy as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _lstm_np as _impl

        BACKEND = "numpy"

sequence_forward = _impl.sequence_forward
sequence_backward = _impl.sequence_backward
