"""Dynamic movement primitives: fit from one demonstration, replay toward new goals.

Transformation system (per dimension, scaled velocity ``v = tau * xdot``)::

    tau * vdot = K (g - x) - D v - K (g - x0) s + K f(s)
    tau * xdot = v
    tau * sdot = -alpha s

with ``f(s) = sum_i w_i psi_i(s) s / sum_i psi_i(s)`` and Gaussian basis
functions ``psi_i(s) = exp(-h_i (s - c_i)^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FitError, NumericError

DEFAULT_K = 100.0
DEFAULT_D = 20.0
DEFAULT_ALPHA = math.log(100.0)
DEFAULT_N_BASIS = 20


@dataclass
class Trajectory:
    """Timestamps in seconds and positions in metres, one row per sample."""

    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x[:, None]
        if self.x.shape[0] != self.t.shape[0]:
            raise ValueError("timestamps and positions differ in length")
        if self.t.shape[0] < 2:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("timestamps must be strictly increasing")

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def ndim(self) -> int:
        return self.x.shape[1]

    def resample(self, n: int) -> np.ndarray:
        """Positions on ``n`` points evenly spaced in normalized time [0, 1]."""
        s = (self.t - self.t[0]) / self.duration
        grid = np.linspace(0.0, 1.0, n)
        return np.column_stack([np.interp(grid, s, self.x[:, d]) for d in range(self.ndim)])

    def to_text(self) -> str:
        lines = [" ".join(f"{v:.17g}" for v in (ti, *xi)) for ti, xi in zip(self.t, self.x)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Trajectory":
        rows = np.array([[float(v) for v in ln.split()] for ln in text.splitlines() if ln.strip()])
        return cls(rows[:, 0], rows[:, 1:])

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "Trajectory":
        return cls.from_text(Path(path).read_text())


def phase(t, tau: float, alpha: float = DEFAULT_ALPHA):
    """Canonical phase ``s(t) = exp(-alpha t / tau)``; 1 at t = 0, strictly decreasing."""
    return np.exp(-alpha * np.asarray(t, dtype=float) / tau)


def basis_centers(n_basis: int, alpha: float = DEFAULT_ALPHA) -> tuple[np.ndarray, np.ndarray]:
    """Centers evenly spaced in time (so log-spaced in phase) and matching widths."""
    c = np.exp(-alpha * np.linspace(0.0, 1.0, n_basis))
    gaps = np.abs(np.diff(c))
    gaps = np.append(gaps, gaps[-1])
    return c, 1.0 / (2.0 * gaps**2)


def _features(s: np.ndarray, centers: np.ndarray, widths: np.ndarray) -> np.ndarray:
    psi = np.exp(-widths[None, :] * (s[:, None] - centers[None, :]) ** 2)
    return psi * s[:, None] / np.maximum(psi.sum(axis=1, keepdims=True), 1e-300)


@dataclass
class DmpSkill:
    weights: np.ndarray  # (ndim, n_basis)
    centers: np.ndarray
    widths: np.ndarray
    K: float = DEFAULT_K
    D: float = DEFAULT_D
    alpha: float = DEFAULT_ALPHA
    tau_demo: float = 1.0
    x0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    g: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def n_basis(self) -> int:
        return self.centers.shape[0]

    def forcing(self, s: float) -> np.ndarray:
        phi = _features(np.atleast_1d(float(s)), self.centers, self.widths)[0]
        return self.weights @ phi


def learn_from_demo(demo: Trajectory, n_basis: int = DEFAULT_N_BASIS, K: float = DEFAULT_K,
                    D: float = DEFAULT_D, alpha: float = DEFAULT_ALPHA) -> DmpSkill:
    """Fit forcing-term weights to one demonstration by least squares.

    Start and goal are the first and last demonstrated positions; ``tau`` is the
    demonstration duration. Velocities and accelerations come from central
    differences (one-sided at the ends).
    """
    if n_basis < 5:
        raise FitError("need at least 5 basis functions")
    if demo.t.shape[0] < 2 * n_basis:
        raise FitError(f"demo has {demo.t.shape[0]} samples, need >= {2 * n_basis} for {n_basis} basis functions")
    tau = demo.duration
    if not tau > 0:
        raise FitError("demonstration has zero duration")
    t = demo.t - demo.t[0]
    x = demo.x
    xd = np.gradient(x, t, axis=0, edge_order=1)
    xdd = np.gradient(xd, t, axis=0, edge_order=1)
    v = tau * xd
    tau_vdot = tau * tau * xdd
    x0, g = x[0].copy(), x[-1].copy()
    s = phase(t, tau, alpha)
    f_target = (tau_vdot + D * v) / K - (g - x) + (g - x0) * s[:, None]
    centers, widths = basis_centers(n_basis, alpha)
    phi = _features(s, centers, widths)
    weights, *_ = np.linalg.lstsq(phi, f_target, rcond=None)
    if not np.all(np.isfinite(weights)):
        raise FitError("regression produced non-finite weights")
    return DmpSkill(weights=weights.T.copy(), centers=centers, widths=widths, K=K, D=D,
                    alpha=alpha, tau_demo=tau, x0=x0, g=g)


def rollout(skill: DmpSkill, x0=None, g=None, tau: float | None = None,
            dt: float | None = None, s_end: float = 0.01, settle_tol: float | None = 1e-4) -> Trajectory:
    """Integrate the primitive from ``x0`` toward ``g`` until the phase drops below ``s_end``.

    When the goal differs from the demonstrated one, the residual ``(g - x0) s``
    term still pulls the state off ``g`` at ``s = s_end``. With ``settle_tol`` set,
    integration continues (at most one more ``tau``) with the phase and forcing
    term switched off until both the distance to ``g`` and the scaled velocity
    fall below it. ``settle_tol=None`` stops at the
    phase threshold exactly.

    Defaults: the skill's own start/goal and ``tau = 2 * tau_demo``; ``dt`` defaults
    to ``tau / 1000`` so trajectories are exactly time-scalable.
    """
    x0 = skill.x0 if x0 is None else np.asarray(x0, dtype=float)
    g = skill.g if g is None else np.asarray(g, dtype=float)
    tau = 2.0 * skill.tau_demo if tau is None else float(tau)
    dt = tau / 1000.0 if dt is None else float(dt)
    params = np.concatenate([x0, g, [tau, dt, skill.K, skill.D, skill.alpha], skill.weights.ravel()])
    if not np.all(np.isfinite(params)):
        raise NumericError("non-finite rollout parameters")
    if not tau > 0:
        raise NumericError("tau must be positive")
    if dt > tau / 100.0 * (1 + 1e-12):
        raise NumericError("dt must be <= tau/100")

    K, D = skill.K, skill.D
    x, v, s = x0.astype(float).copy(), np.zeros_like(x0, dtype=float), 1.0
    n_phase = int(math.ceil(math.log(1.0 / s_end) / skill.alpha * tau / dt)) + 1
    n_steps = n_phase + (int(math.ceil(tau / dt)) if settle_tol is not None else 0)
    ts = np.empty(n_steps + 1)
    xs = np.empty((n_steps + 1, x.shape[0]))
    ts[0], xs[0] = 0.0, x
    k = 0
    while k < n_steps:
        if s < s_end and (settle_tol is None or
                          (np.max(np.abs(g - x)) < settle_tol and np.max(np.abs(v)) < settle_tol)):
            break
        if s < s_end:
            s = 0.0     # phase finished: settle as a plain spring-damper
        f = skill.forcing(s) if s > 0.0 else 0.0
        vdot = (K * (g - x) - D * v - K * (g - x0) * s + K * f) / tau
        v = v + dt * vdot
        x = x + dt * v / tau
        s = s - dt * skill.alpha * s / tau
        k += 1
        ts[k], xs[k] = k * dt, x
    return Trajectory(ts[: k + 1], xs[: k + 1])


def minimum_jerk(x0, g, duration: float, n: int) -> Trajectory:
    """Minimum-jerk point-to-point profile sampled at ``n`` points."""
    x0, g = np.asarray(x0, dtype=float), np.asarray(g, dtype=float)
    t = np.linspace(0.0, duration, n)
    r = t / duration
    blend = 10 * r**3 - 15 * r**4 + 6 * r**5
    return Trajectory(t, x0[None, :] + (g - x0)[None, :] * blend[:, None])


def skill_to_text(skill: DmpSkill) -> str:
    head = f"{skill.K} {skill.D} {skill.alpha} {skill.tau_demo}\n"
    rows = [" ".join(f"{v:.17g}" for v in arr) for arr in (skill.x0, skill.g, skill.centers, skill.widths)]
    rows += [" ".join(f"{v:.17g}" for v in w) for w in skill.weights]
    return head + "\n".join(rows) + "\n"


def skill_from_text(text: str) -> DmpSkill:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    K, D, alpha, tau_demo = (float(v) for v in lines[0].split())
    arr = [np.array([float(v) for v in ln.split()]) for ln in lines[1:]]
    return DmpSkill(weights=np.vstack(arr[4:]), centers=arr[2], widths=arr[3], K=K, D=D,
                    alpha=alpha, tau_demo=tau_demo, x0=arr[0], g=arr[1])
