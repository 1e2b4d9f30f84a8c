"""Composite Gauss-Lobatto grids and small quadrature helpers."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from .errors import ValidationError


@lru_cache(maxsize=64)
def lobatto(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto nodes and weights on [-1, 1] with ``m`` points."""
    if m < 2:
        raise ValidationError("Lobatto rule needs at least 2 points")
    n = m - 1
    cn = np.zeros(n + 1)
    cn[n] = 1.0
    interior = legendre.legroots(legendre.legder(cn)) if n > 1 else np.array([])
    x = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    pn = legendre.legval(x, cn)
    w = 2.0 / (n * (n + 1) * pn**2)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_grid(breaks, m: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Composite Lobatto nodes/weights over consecutive panels.

    Shared panel endpoints are merged, so the node array is strictly
    increasing and starts at ``breaks[0]``.
    """
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size < 2 or np.any(np.diff(breaks) <= 0):
        raise ValidationError("panel breaks must be strictly increasing")
    s, ws = lobatto(m)
    nodes = [breaks[:1]]
    weights = np.zeros((m - 1) * (breaks.size - 1) + 1)
    for j, (a, b) in enumerate(zip(breaks[:-1], breaks[1:])):
        h = 0.5 * (b - a)
        nodes.append(a + h * (s[1:] + 1.0))
        k = j * (m - 1)
        weights[k : k + m] += h * ws
    return np.concatenate(nodes), weights


def uniform_panels(a: float, b: float, width: float) -> np.ndarray:
    count = max(1, int(np.ceil((b - a) / width - 1e-12)))
    return np.linspace(a, b, count + 1)


def spline_weights(grid: np.ndarray) -> np.ndarray:
    """Quadrature weights that integrate the cubic-spline interpolant.

    Fallback for sample grids that do not carry their own rule.
    """
    from scipy.interpolate import CubicSpline

    grid = np.asarray(grid, dtype=float)
    if grid.size < 4:
        return np.gradient(grid) if grid.size > 1 else np.zeros_like(grid)
    spline = CubicSpline(grid, np.eye(grid.size), bc_type="not-a-knot")
    return spline.integrate(grid[0], grid[-1])


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on ``n`` (odd) equispaced points."""
    if n < 3 or n % 2 == 0:
        raise ValidationError("Simpson's rule needs an odd number >= 3 of points")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0
