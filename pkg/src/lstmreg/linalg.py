"""Dense linear-algebra primitives used across the package.

Matrices are 2-d and vectors 1-d ``float64`` numpy arrays.  Everything here
is a pure function; nothing mutates its inputs.  The spectral norm is
computed by power iteration with a deterministic start vector so that
repeated runs are bit-identical.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

POWER_MAX_ITERS = 100
POWER_TOL = 1e-9

_DEGENERATE_EPS = 1e-300


def as_matrix(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={w.ndim}")
    return w


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got ndim={v.ndim}")
    return v


def matvec(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product with an explicit dimension check."""
    w = as_matrix(w)
    v = as_vector(v)
    if w.shape[1] != v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {w.shape[0]}x{w.shape[1]}, "
            f"vector has dim {v.shape[0]}"
        )
    return w @ v


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two vectors of equal dimension."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a * b


class SpectralNorm(NamedTuple):
    value: float
    u: np.ndarray  # top left singular vector
    v: np.ndarray  # top right singular vector
    degenerate: bool


def spectral_norm(w: np.ndarray, max_iters: int = POWER_MAX_ITERS,
                  tol: float = POWER_TOL) -> SpectralNorm:
    """Largest singular value of ``w`` with its singular vectors.

    Power iteration on ``w.T @ w`` starting from the normalized all-ones
    vector; stops when successive value estimates differ by less than
    ``tol`` or after ``max_iters`` rounds.  A zero matrix is reported with
    ``degenerate=True`` and canonical basis vectors.
    """
    w = as_matrix(w)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    m, n = w.shape

    def basis(k, i=0):
        e = np.zeros(k)
        e[i] = 1.0
        return e

    if not np.any(w):
        return SpectralNorm(0.0, basis(m), basis(n), True)

    gram = w.T @ w
    v = np.full(n, 1.0 / np.sqrt(n))
    # the all-ones start can be orthogonal to the top singular subspace;
    # fall back to canonical basis vectors until the iterate survives
    restart = 0
    value = 0.0
    for _ in range(max_iters):
        z = gram @ v
        norm_z = float(np.linalg.norm(z))
        if norm_z < _DEGENERATE_EPS:
            if restart < n:
                v = basis(n, restart)
                restart += 1
                continue
            return SpectralNorm(0.0, basis(m), basis(n), True)
        v = z / norm_z
        new_value = float(np.linalg.norm(w @ v))
        if abs(new_value - value) < tol:
            value = new_value
            break
        value = new_value

    wv = w @ v
    norm_wv = float(np.linalg.norm(wv))
    if norm_wv < _DEGENERATE_EPS:
        return SpectralNorm(0.0, basis(m), basis(n), True)
    u = wv / norm_wv
    return SpectralNorm(value, u, v, False)


def spectral_norm_grad(w: np.ndarray, max_iters: int = POWER_MAX_ITERS,
                       tol: float = POWER_TOL) -> np.ndarray:
    """Gradient of the spectral norm: the rank-one matrix ``u1 @ v1.T``.

    Exact when the top singular value is simple; otherwise (and for the
    zero matrix, where the subgradient 0 is returned) a valid subgradient.
    """
    w = as_matrix(w)
    res = spectral_norm(w, max_iters=max_iters, tol=tol)
    if res.degenerate:
        return np.zeros_like(w)
    return np.outer(res.u, res.v)


def frobenius_norm(w: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    w = as_matrix(w)
    return float(np.sqrt(np.sum(w * w)))


def frobenius_norm_grad(w: np.ndarray) -> np.ndarray:
    """Gradient of the Frobenius norm, ``w / ||w||_F`` (0 for the zero matrix)."""
    w = as_matrix(w)
    norm = frobenius_norm(w)
    if norm < _DEGENERATE_EPS:
        return np.zeros_like(w)
    return w / norm
