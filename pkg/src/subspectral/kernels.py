"""Kernel functions, sample containers, and Gram-matrix construction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist


def _abel_l1(gamma: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.exp(-gamma * cdist(x, y, "cityblock"))


def _gaussian(gamma: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.exp(-gamma * cdist(x, y, "sqeuclidean"))


def _linear(gamma: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y.T


# Registry with the three built-in families; experiments may add kernels via
# register_kernel_family without touching core modules.
_FAMILIES: dict[str, Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = {
    "abel_l1": _abel_l1,
    "gaussian": _gaussian,
    "linear": _linear,
}


def register_kernel_family(name: str, fn) -> None:
    """Register a pairwise kernel fn(gamma, X, Y) -> (len(X), len(Y)) matrix."""
    _FAMILIES[name] = fn


def kernel_families() -> tuple[str, ...]:
    return tuple(_FAMILIES)


@dataclass(frozen=True)
class Kernel:
    """A kernel family plus its width/decay parameter (unused for linear)."""

    family: str
    gamma: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; "
                f"known: {sorted(_FAMILIES)}"
            )
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    def pairwise(self, x, y) -> np.ndarray:
        """Kernel matrix between two point sets, shape (len(x), len(y))."""
        a, b = as_points(x), as_points(y)
        if a.shape[1] != b.shape[1]:
            raise ValueError(
                f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
            )
        return _FAMILIES[self.family](self.gamma, a, b)


def as_points(x) -> np.ndarray:
    """Coerce to an (n, d) float array of sample points; validates finiteness."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a single d-dimensional point
        a = a.reshape(1, -1)
    elif a.ndim != 2:
        raise ValueError(f"points must be at most 2-d, got shape {a.shape}")
    if a.shape[0] == 0:
        raise ValueError("empty point set")
    if not np.all(np.isfinite(a)):
        raise ValueError("points must be finite")
    return a


def eval_kernel(k: Kernel, z, w) -> float:
    """Evaluate K(z, w) for single points; symmetric in its arguments."""
    return float(k.pairwise(z, w)[0, 0])


def gram(k: Kernel, points) -> np.ndarray:
    """Symmetric Gram matrix K[i, j] = K(z_i, z_j); PSD up to round-off."""
    x = as_points(points)
    g = k.pairwise(x, x)
    return 0.5 * (g + g.T)


def load_points_csv(path) -> np.ndarray:
    """Load sample points from CSV: one point per row, d columns, no header."""
    a = np.loadtxt(path, delimiter=",", ndmin=2)
    return as_points(a)


def save_points_csv(path, points) -> None:
    np.savetxt(path, as_points(points), delimiter=",", fmt="%.17g")
