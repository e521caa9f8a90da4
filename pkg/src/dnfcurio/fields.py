"""Dynamic field primitives: activation fields, kernels, memory traces, slow boosts.

All time quantities are milliseconds of simulated time. Integration is
exponential Euler: each step treats the input as constant and applies the exact
solution of the linear leak, so kernel-free relaxation and trace build/decay
follow their closed forms at any ``dt < tau``. The caller chooses ``dt`` (10 ms
throughout the architecture).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigError, IntegrationStabilityError

FEATURE_EXTENT = 100
TRANSFERS = ("sigmoid", "absolute_sigmoid", "relu")


def transfer(u, kind: str = "sigmoid", beta: float = 4.0):
    """Output nonlinearity of a field, threshold at zero.

    sigmoid: ``1/(1+exp(-beta u))``; absolute_sigmoid: ``0.5(1 + beta u/(1+beta|u|))``
    clamped to [0, 1]; relu: ``max(0, u)``. Scalars in, scalars out.
    """
    scalar = np.ndim(u) == 0
    arr = np.asarray(u, dtype=np.float64)
    if kind == "sigmoid":
        out = kernels.sigmoid(np.ascontiguousarray(arr).reshape(-1), beta).reshape(arr.shape)
    elif kind == "absolute_sigmoid":
        out = np.clip(0.5 * (1.0 + beta * arr / (1.0 + beta * np.abs(arr))), 0.0, 1.0)
    elif kind == "relu":
        out = np.maximum(arr, 0.0)
    else:
        raise ConfigError(f"unknown transfer {kind!r}; expected one of {TRANSFERS}")
    return float(out) if scalar else out


def _as_sigmas(value, ndim: int) -> tuple[float, ...]:
    if np.ndim(value) == 0:
        return (float(value),) * max(ndim, 1)
    sig = tuple(float(s) for s in value)
    if len(sig) != ndim:
        raise ConfigError(f"expected {ndim} sigma values, got {len(sig)}")
    return sig


@dataclass
class InteractionKernel:
    """Difference of Gaussians plus a global term.

    ``k(d) = c_exc exp(-d²/2σ_exc²) - c_inh exp(-d²/2σ_inh²)``, per-dimension
    widths allowed. ``c_inh`` is a magnitude; the minus sign is in the formula.
    ``g_global`` (≤ 0) multiplies the summed field output. Taps are truncated at
    ``cutoff`` standard deviations (and never wider than the field).
    """

    c_exc: float = 0.0
    sigma_exc: float | Sequence[float] = 1.0
    c_inh: float = 0.0
    sigma_inh: float | Sequence[float] = 1.0
    g_global: float = 0.0
    cutoff: float = 5.0

    def __post_init__(self):
        for s in np.atleast_1d(self.sigma_exc):
            if not s > 0:
                raise ConfigError("sigma_exc must be > 0")
        for s in np.atleast_1d(self.sigma_inh):
            if not s > 0:
                raise ConfigError("sigma_inh must be > 0")
        if self.c_inh < 0:
            raise ConfigError("c_inh is stored as a non-negative magnitude")
        if self.g_global > 0:
            raise ConfigError("g_global must be <= 0")
        self._taps: dict = {}

    def evaluate(self, *offsets) -> np.ndarray | float:
        """Kernel value at the given per-dimension offsets (feature units)."""
        nd = len(offsets)
        se, si = _as_sigmas(self.sigma_exc, nd), _as_sigmas(self.sigma_inh, nd)
        qe = sum(np.asarray(d, dtype=float) ** 2 / s**2 for d, s in zip(offsets, se))
        qi = sum(np.asarray(d, dtype=float) ** 2 / s**2 for d, s in zip(offsets, si))
        val = self.c_exc * np.exp(-0.5 * qe) - self.c_inh * np.exp(-0.5 * qi)
        return float(val) if np.ndim(val) == 0 else val

    def taps(self, part: str, ndim: int, extent: int) -> list[np.ndarray]:
        key = (part, ndim, extent)
        if key not in self._taps:
            sig = _as_sigmas(self.sigma_exc if part == "exc" else self.sigma_inh, ndim)
            out = []
            for s in sig:
                radius = min(int(math.ceil(self.cutoff * s)), extent - 1)
                out.append(kernels.gaussian_taps(s, radius))
            self._taps[key] = out
        return self._taps[key]

    def convolve(self, f: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Convolve ``f`` with the two Gaussian components (no global term)."""
        nd = f.ndim
        if nd == 0:
            return np.asarray((self.c_exc - self.c_inh) * f)
        conv = kernels.conv1d if nd == 1 else kernels.conv2d
        out = np.zeros_like(f)
        for part, c in (("exc", self.c_exc), ("inh", -self.c_inh)):
            if c == 0.0:
                continue
            taps = self.taps(part, nd, f.shape[0])
            out += c * conv(f, *taps, tol)
        return out


@dataclass
class FieldGrid:
    """An Amari activation field: a 0-D node, or a 1-D/2-D lattice of 100 samples per axis.

    ``u`` starts at the resting level ``h``. ``output_floor`` zeroes outputs below
    it so that quiet fields stay exactly quiet; ``sparse_tol`` is the source
    magnitude below which convolution skips a sample.
    """

    name: str = ""
    dims: int = 0
    h: float = -1.0
    tau: float = 100.0
    transfer: str = "sigmoid"
    beta: float = 4.0
    noise_amp: float = 0.0
    kernel: Optional[InteractionKernel] = None
    extent: int = FEATURE_EXTENT
    output_floor: float = 0.0
    sparse_tol: float = 0.0
    rng: Optional[np.random.Generator] = field(default=None, repr=False)

    def __post_init__(self):
        if self.dims not in (0, 1, 2):
            raise ConfigError(f"{self.name}: dims must be 0, 1 or 2")
        if self.dims and self.extent != FEATURE_EXTENT:
            raise ConfigError(f"{self.name}: feature fields have exactly {FEATURE_EXTENT} samples per axis")
        if self.transfer not in TRANSFERS:
            raise ConfigError(f"{self.name}: unknown transfer {self.transfer!r}")
        if not self.tau > 0:
            raise ConfigError(f"{self.name}: tau must be > 0")
        self.shape: tuple[int, ...] = (self.extent,) * self.dims
        self._flat = np.full(int(np.prod(self.shape, dtype=int)), float(self.h))
        self.u = self._flat.reshape(self.shape)

    def reset(self) -> None:
        self._flat[:] = self.h

    def set_activation(self, values) -> None:
        self._flat[:] = np.broadcast_to(np.asarray(values, dtype=float), self.shape).reshape(-1)

    def output(self) -> np.ndarray:
        out = np.asarray(transfer(self.u, self.transfer, self.beta), dtype=np.float64)
        if self.output_floor > 0.0:
            out = np.where(out < self.output_floor, 0.0, out)
        return out


def lateral_interaction(field: FieldGrid, output: Optional[np.ndarray] = None) -> np.ndarray:
    """Kernel convolution of the field output plus the global term, zero outside the grid."""
    if field.kernel is None:
        raise ConfigError(f"{field.name}: field has no interaction kernel")
    f = field.output() if output is None else output
    lat = field.kernel.convolve(f, field.sparse_tol)
    if field.kernel.g_global:
        lat = lat + field.kernel.g_global * float(f.sum())
    return np.asarray(lat, dtype=np.float64).reshape(field.shape)


def check_step(dt: float, tau: float, what: str) -> None:
    if not dt > 0:
        raise IntegrationStabilityError(f"{what}: dt must be positive")
    if dt >= tau:
        raise IntegrationStabilityError(f"{what}: dt={dt} ms must be smaller than tau={tau} ms")


def step_field(field: FieldGrid, external_input, dt: float,
               rng: Optional[np.random.Generator] = None,
               output: Optional[np.ndarray] = None) -> FieldGrid:
    """Advance ``field`` by one exponential Euler step in place and return it.

    ``tau du/dt = -u + h + S + lateral + noise``. Noise is ``noise_amp`` times a
    standard normal draw from ``rng`` (or the field's own generator).
    """
    check_step(dt, field.tau, field.name or "field")
    s = np.asarray(external_input, dtype=np.float64)
    if s.shape != field.shape:
        if s.ndim == 0:
            s = np.full(field.shape, float(s))
        else:
            raise ConfigError(f"{field.name}: input shape {s.shape} != field shape {field.shape}")
    drive = s.copy() if field.kernel is None else s + lateral_interaction(field, output)
    if field.noise_amp > 0.0:
        gen = rng if rng is not None else field.rng
        if gen is None:
            raise ConfigError(f"{field.name}: noisy field needs a random generator")
        drive = drive + field.noise_amp * gen.standard_normal(field.shape)
    kernels.relax(field._flat, np.ascontiguousarray(drive).reshape(-1), field.h, dt / field.tau)
    return field


@dataclass
class MemoryTrace:
    """Gated leaky accumulator over a source output.

    ``dv/dt = a(t) [ (-v+f) f / tau_plus - v (1-f) / tau_minus ]``. With
    ``graded=True`` the trace instead relaxes toward ``f`` where ``f > 0`` and
    decays where ``f = 0``, so it can store a level; both forms coincide for
    binary sources.
    """

    name: str = ""
    shape: tuple[int, ...] = ()
    tau_plus: float = 1000.0
    tau_minus: float = 1000.0
    graded: bool = False
    source: str = ""
    gate: Optional[str] = None

    def __post_init__(self):
        self.shape = tuple(self.shape)
        if not (self.tau_plus > 0 and self.tau_minus > 0):
            raise ConfigError(f"{self.name}: trace time constants must be > 0")
        self._flat = np.zeros(int(np.prod(self.shape, dtype=int)))
        self.v = self._flat.reshape(self.shape)

    def reset(self) -> None:
        self._flat[:] = 0.0


def step_memory_trace(trace: MemoryTrace, source_output, gate_output: float, dt: float) -> MemoryTrace:
    """One gated step of a memory trace; the source is clipped to [0, 1]."""
    check_step(dt, min(trace.tau_plus, trace.tau_minus), trace.name or "memory trace")
    f = np.clip(np.broadcast_to(np.asarray(source_output, dtype=np.float64), trace.shape), 0.0, 1.0)
    kernels.trace_step(trace._flat, np.ascontiguousarray(f).reshape(-1), float(gate_output), dt,
                       trace.tau_plus, trace.tau_minus, trace.graded)
    return trace


@dataclass
class SlowBoost:
    """Scalar trace driven by an active node and a threshold node.

    Builds toward the active output while it is on, holds when both are off,
    decays while only the threshold node is on.
    """

    name: str = ""
    tau_plus: float = 3000.0
    tau_minus: float = 300.0
    active: str = ""
    threshold: str = ""
    v: float = 0.0

    def reset(self) -> None:
        self.v = 0.0


def step_slow_boost(boost: SlowBoost, active_out: float, threshold_out: float, dt: float) -> SlowBoost:
    check_step(dt, min(boost.tau_plus, boost.tau_minus), boost.name or "slow boost")
    a, t, v = float(active_out), float(threshold_out), boost.v
    # a (-v+a) a / tau+ + t (-v)(1-a) / tau-, written as src - k v
    k = a * a / boost.tau_plus + t * (1.0 - a) / boost.tau_minus
    src = a * a * a / boost.tau_plus
    boost.v = v + (-math.expm1(-dt * k) * (src / k - v) if k > 0.0 else dt * src)
    return boost


@dataclass
class Projection:
    """A weighted connection between named sources and a target field.

    ``dim_map`` is inferred from the shapes: identity, broadcast from a node,
    expand a 1-D source along ``axis`` of a 2-D target (``axis`` names the
    target axis the source runs along), or contract along ``axis`` (2-D → 1-D,
    the axis that is removed) or entirely (→ node) with ``op`` max/sum.
    Optional extras: ``kernel`` convolution in source space, ``normalize``
    (``mass``: divide the source by its sum before convolving, so a localized
    blob projects the kernel shape itself at its center), elementwise ``mask``
    by another output, and multiplicative ``gate`` by a node output.
    """

    source: str
    target: str
    gain: float = 1.0
    axis: Optional[int] = None
    op: str = "max"
    kernel: Optional[InteractionKernel] = None
    normalize: str = "none"
    mask: Optional[str] = None
    gate: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        if self.op not in ("max", "sum"):
            raise ConfigError(f"projection {self.name or self.source}: op must be max or sum")
        if self.normalize not in ("none", "mass"):
            raise ConfigError(f"projection {self.name}: unknown normalize {self.normalize!r}")

    def apply(self, src: np.ndarray, target_shape: tuple[int, ...],
              mask: Optional[np.ndarray] = None, gate: Optional[float] = None) -> np.ndarray:
        x = np.asarray(src, dtype=np.float64)
        if mask is not None:
            x = x * mask
        if self.kernel is not None:
            if self.normalize == "mass":
                total = x.sum()
                x = x / total if total > 0 else np.zeros_like(x)
            x = self.kernel.convolve(x)
        out = self._map(x, target_shape)
        scale = self.gain if gate is None else self.gain * gate
        return scale * out

    def _map(self, x: np.ndarray, tshape: tuple[int, ...]) -> np.ndarray:
        if x.shape == tshape:
            return x
        reduce = np.max if self.op == "max" else np.sum
        if len(tshape) == 0:
            return np.asarray(reduce(x))
        if x.ndim == 0:
            return np.full(tshape, float(x))
        if x.ndim == 1 and len(tshape) == 2:
            axis = 0 if self.axis is None else self.axis
            return np.broadcast_to(x[:, None] if axis == 0 else x[None, :], tshape).copy()
        if x.ndim == 2 and len(tshape) == 1:
            axis = 1 if self.axis is None else self.axis
            return reduce(x, axis=axis)
        raise ConfigError(f"projection {self.source}->{self.target}: cannot map {x.shape} to {tshape}")
