"""DMP neurons and their Hebbian link to the goal-focus field.

Each discovered goal owns one neuron. While exploring, the weights of an active
neuron relax toward the goal-focus output,
``dw/dt = -eta * explore * out_i * (w_i - focus)``. Later a goal-focus peak at
the same place re-activates the neuron through the learned overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..fields import transfer

OUTPUT_FLOOR = 1e-9


@dataclass
class DmpNeurons:
    h: float = -1.0
    tau: float = 20.0
    beta: float = 100.0
    create_gain: float = 2.0
    overlap_gain: float = 2.0
    rate: float = 0.01              # eta, 1/ms
    weights: list[np.ndarray] = field(default_factory=list)
    u: list[float] = field(default_factory=list)
    create: list[bool] = field(default_factory=list)

    def add(self, shape=(100, 100)) -> int:
        self.weights.append(np.zeros(shape))
        self.u.append(self.h)
        self.create.append(False)
        return len(self.weights) - 1

    def __len__(self) -> int:
        return len(self.weights)

    def outputs(self) -> np.ndarray:
        out = np.array([transfer(u, "sigmoid", self.beta) for u in self.u])
        out[out < OUTPUT_FLOOR] = 0.0
        return out

    def overlaps(self, focus: np.ndarray) -> np.ndarray:
        """Focus-weighted mean of each weight map, in [0, 1]."""
        total = float(focus.sum())
        if total <= 0.0 or not self.weights:
            return np.zeros(len(self.weights))
        rows = np.flatnonzero(focus.any(axis=1))
        cols = np.flatnonzero(focus.any(axis=0))
        box = np.s_[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
        f = focus[box]
        return np.array([float((w[box] * f).sum()) / total for w in self.weights])

    def step(self, dt: float, explore: float, focus: np.ndarray) -> None:
        """Advance the neurons, then apply the Hebbian rule with the outputs they had at entry."""
        if not self.weights:
            return
        out = self.outputs()
        ov = self.overlaps(focus)
        for i in range(len(self.u)):
            drive = self.create_gain * float(self.create[i]) + self.overlap_gain * ov[i]
            self.u[i] += -math.expm1(-dt / self.tau) * (-self.u[i] + self.h + drive)
        hebbian_update(self, dt, explore, focus, out)


def hebbian_update(neurons: DmpNeurons, dt: float, explore: float, focus: np.ndarray,
                   outputs: np.ndarray | None = None) -> DmpNeurons:
    """One Euler step of the Hebbian rule; weights are untouched while any gate is zero."""
    if explore <= 0.0:
        return neurons
    out = neurons.outputs() if outputs is None else outputs
    for i, o in enumerate(out):
        if o > 0.0:
            w = neurons.weights[i]
            w += dt * (-neurons.rate * explore * o * (w - focus))
    return neurons
