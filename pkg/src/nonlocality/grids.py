"""Deterministic point sets used to seed the optimisers."""

from __future__ import annotations

import numpy as np

GOLDEN_ANGLE = np.pi * (3 - np.sqrt(5))


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` nearly uniform unit vectors (spherical Fibonacci lattice)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    rho = np.sqrt(1 - z * z)
    phi = GOLDEN_ANGLE * i
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


def fibonacci_hemisphere(n: int) -> np.ndarray:
    """``n`` directions with z >= 0; enough when v and -v are equivalent."""
    pts = fibonacci_sphere(2 * n)
    return pts[pts[:, 2] >= 0][:n]


def points_for_resolution(step: float) -> int:
    """Lattice size whose mean spacing is about ``step`` radians."""
    return max(12, int(np.ceil(4 * np.pi / step**2)))


def unit(v: np.ndarray, fallback=None) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-300:
        return np.array([1.0, 0.0, 0.0]) if fallback is None else np.asarray(fallback, dtype=float)
    return v / n
