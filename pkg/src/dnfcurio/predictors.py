"""Small online MLPs used as forward and inverse models of a skill.

The forward model maps (object x, object y, command x, command y) to the
normalized outcome angle; the inverse model maps (object x, object y, angle) to
a command. All inputs and outputs are normalized to [0, 1].
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

TOPOLOGIES = {"forward": (4, 6, 1), "inverse": (3, 4, 2)}
BUFFER_SIZE = 20
LEARNING_RATE = 0.05
INIT_SCALE = 0.5


def loss(prediction, target) -> float:
    """Bounded error ``tanh(MSE)``; always in [0, 1)."""
    p = np.asarray(prediction, dtype=float)
    t = np.asarray(target, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"prediction shape {p.shape} != target shape {t.shape}")
    return float(np.tanh(np.mean((p - t) ** 2)))


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class Sample:
    x: np.ndarray
    y: np.ndarray


class Predictor:
    """One-hidden-layer perceptron (tanh hidden, sigmoid output) with a FIFO replay buffer."""

    def __init__(self, kind: str = "forward", seed: int = 0, learning_rate: float = LEARNING_RATE,
                 init_scale: float = INIT_SCALE, buffer_size: int = BUFFER_SIZE, topology=None):
        if topology is None:
            if kind not in TOPOLOGIES:
                raise ValueError(f"unknown predictor kind {kind!r}")
            topology = TOPOLOGIES[kind]
        self.kind = kind
        self.n_in, self.n_hidden, self.n_out = topology
        self.learning_rate = float(learning_rate)
        rng = np.random.default_rng(seed)
        u = lambda *shape: rng.uniform(-init_scale, init_scale, size=shape)
        self.W1, self.b1 = u(self.n_hidden, self.n_in), u(self.n_hidden)
        self.W2, self.b2 = u(self.n_out, self.n_hidden), u(self.n_out)
        self.buffer: deque[Sample] = deque(maxlen=buffer_size)

    # ----------------------------------------------------------------- forward
    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_in,):
            raise ValueError(f"{self.kind} model expects input of length {self.n_in}, got shape {x.shape}")
        return x

    def predict(self, x) -> np.ndarray:
        x = self._check_input(x)
        return _sigmoid(self.W2 @ np.tanh(self.W1 @ x + self.b1) + self.b2)

    def loss(self, x, y) -> float:
        return loss(self.predict(x), y)

    # ---------------------------------------------------------------- training
    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def gradients(self, x, y) -> list[np.ndarray]:
        """Gradients of ``tanh(MSE)`` with respect to ``[W1, b1, W2, b2]``."""
        x = self._check_input(x)
        y = np.asarray(y, dtype=float)
        a1 = np.tanh(self.W1 @ x + self.b1)
        out = _sigmoid(self.W2 @ a1 + self.b2)
        mse = np.mean((out - y) ** 2)
        d_out = (1.0 - np.tanh(mse) ** 2) * 2.0 * (out - y) / self.n_out
        d_z2 = d_out * out * (1.0 - out)
        d_z1 = (self.W2.T @ d_z2) * (1.0 - a1**2)
        return [np.outer(d_z1, x), d_z1, np.outer(d_z2, a1), d_z2]

    def _sgd(self, grads) -> None:
        for p, g in zip(self.params(), grads):
            p -= self.learning_rate * g

    def train_on_new(self, samples) -> float:
        """One step on the mean gradient of the new samples, then one epoch over the buffer.

        ``samples`` is an iterable of ``(x, y)`` pairs. Returns the mean loss over
        the buffer after training.
        """
        new = [Sample(self._check_input(x).copy(), np.asarray(y, dtype=float).copy()) for x, y in samples]
        if not new:
            return self.buffer_loss()
        acc = [np.zeros_like(p) for p in self.params()]
        for s in new:
            for a, g in zip(acc, self.gradients(s.x, s.y)):
                a += g
        self._sgd([a / len(new) for a in acc])
        self.buffer.extend(new)
        for s in list(self.buffer):
            self._sgd(self.gradients(s.x, s.y))
        return self.buffer_loss()

    def buffer_loss(self) -> float:
        if not self.buffer:
            return 0.0
        return float(np.mean([self.loss(s.x, s.y) for s in self.buffer]))

    # ------------------------------------------------------------ snapshots
    def to_text(self) -> str:
        lines = [f"{self.kind} {self.n_in} {self.n_hidden} {self.n_out} {self.learning_rate!r}"]
        lines += [" ".join(f"{v:.17g}" for v in p.ravel()) for p in self.params()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Predictor":
        lines = text.splitlines()
        kind, n_in, n_h, n_out, lr = lines[0].split()
        model = cls(kind, learning_rate=float(lr), topology=(int(n_in), int(n_h), int(n_out)))
        for p, ln in zip(model.params(), lines[1:5]):
            p[...] = np.array([float(v) for v in ln.split()]).reshape(p.shape)
        return model
