"""Pure numpy implementations of the compiled field kernels.

Same signatures as ``dnfcurio._core``. Convolutions go through cached Toeplitz
matrices so the dense part runs in BLAS.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _toeplitz(taps: bytes, n: int) -> np.ndarray:
    w = np.frombuffer(taps, dtype=np.float64)
    r = (w.shape[0] - 1) // 2
    idx = np.arange(n)
    d = idx[:, None] - idx[None, :]
    mat = np.zeros((n, n))
    inside = np.abs(d) <= r
    mat[inside] = w[d[inside] + r]
    mat.setflags(write=False)
    return mat


def conv1d(f: np.ndarray, w: np.ndarray, tol: float) -> np.ndarray:
    src = np.where(np.abs(f) > tol, f, 0.0)
    if not src.any():
        return np.zeros_like(f)
    return _toeplitz(np.ascontiguousarray(w).tobytes(), f.shape[0]) @ src


def conv2d(f: np.ndarray, w0: np.ndarray, w1: np.ndarray, tol: float) -> np.ndarray:
    rows = np.flatnonzero(np.abs(f).max(axis=1) > tol)
    out = np.zeros_like(f)
    if rows.size == 0:
        return out
    t1 = _toeplitz(np.ascontiguousarray(w1).tobytes(), f.shape[1])
    t0 = _toeplitz(np.ascontiguousarray(w0).tobytes(), f.shape[0])
    tmp = f[rows] @ t1
    out += t0[:, rows] @ tmp
    return out


def relax(u: np.ndarray, drive: np.ndarray, h: float, dt_tau: float) -> None:
    # exponential Euler: exact while the drive is held over the step
    u += -math.expm1(-dt_tau) * (-u + h + drive)


def trace_step(v, f, a, dt, tau_plus, tau_minus, graded) -> None:
    if a == 0.0:
        return
    if graded:
        pos = f > 0.0
        up = -math.expm1(-dt * a / tau_plus)
        down = math.exp(-dt * a / tau_minus)
        v[:] = np.where(pos, v + up * (f - v), v * down)
    else:
        # linear in v: dv/dt = src - k v
        k = a * (f / tau_plus + (1.0 - f) / tau_minus)
        src = a * f * f / tau_plus
        safe = np.where(k > 0.0, k, 1.0)
        v[:] = np.where(k > 0.0, v + -np.expm1(-dt * safe) * (src / safe - v), v + dt * src)


SIGMOID_CUT = -40.0  # exp(-40) ~ 4e-18, below every output floor in use


def sigmoid(u: np.ndarray, beta: float) -> np.ndarray:
    z = beta * u
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    out[z < SIGMOID_CUT] = 0.0
    return out
