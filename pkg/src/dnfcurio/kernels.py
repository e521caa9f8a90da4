"""Backend selection for the field inner loops.

The compiled extension is used when it imports; set ``DNFCURIO_PURE_PYTHON=1``
to force the numpy fallback.
"""
from __future__ import annotations

import logging
import os

import numpy as np

from . import _core_py

log = logging.getLogger(__name__)


def _load_backend():
    if os.environ.get("DNFCURIO_PURE_PYTHON"):
        return _core_py, "python"
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        log.debug("compiled core unavailable, using numpy fallback")
        return _core_py, "python"
    return _core, "compiled"


backend, BACKEND_NAME = _load_backend()


def use_backend(name: str) -> None:
    """Switch backend at runtime ("compiled" or "python"); used by tests and benchmarks."""
    global backend, BACKEND_NAME
    if name == "python":
        backend, BACKEND_NAME = _core_py, "python"
    elif name == "compiled":
        from . import _core  # type: ignore[attr-defined]

        backend, BACKEND_NAME = _core, "compiled"
    else:
        raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        from . import _core  # type: ignore[attr-defined]  # noqa: F401
    except ImportError:
        return False
    return True


def gaussian_taps(sigma: float, radius: int) -> np.ndarray:
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    return np.exp(-0.5 * (d / sigma) ** 2)


def conv1d(f, w, tol=0.0):
    return backend.conv1d(np.ascontiguousarray(f, dtype=np.float64), w, float(tol))


def conv2d(f, w0, w1, tol=0.0):
    return backend.conv2d(np.ascontiguousarray(f, dtype=np.float64), w0, w1, float(tol))


def relax(u_flat, drive_flat, h, dt_tau):
    backend.relax(u_flat, drive_flat, float(h), float(dt_tau))


def trace_step(v_flat, f_flat, a, dt, tau_plus, tau_minus, graded):
    backend.trace_step(v_flat, f_flat, float(a), float(dt), float(tau_plus), float(tau_minus), bool(graded))


def sigmoid(u_flat, beta):
    return backend.sigmoid(u_flat, float(beta))
