"""Gaussian stimulus patterns on the 100-sample feature grid."""
from __future__ import annotations

import numpy as np

GRID = np.arange(100, dtype=float)


def to_cell(feature: float) -> float:
    """Feature value in [0, 100] to a (fractional) grid coordinate in [0, 99]."""
    return float(np.clip(feature, 0.0, 99.0))


def gaussian_1d(center: float, sigma: float, amplitude: float = 1.0) -> np.ndarray:
    return amplitude * np.exp(-0.5 * ((GRID - to_cell(center)) / sigma) ** 2)


def gaussian_2d(center, sigma: float, amplitude: float = 1.0) -> np.ndarray:
    return np.outer(gaussian_1d(center[0], sigma), gaussian_1d(center[1], sigma)) * amplitude


def peak(values: np.ndarray) -> tuple[int, ...]:
    """Index of the maximum; ties resolve to the lowest flat index."""
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(values)), values.shape))
