"""Closed-form solutions used as convergence references."""

from __future__ import annotations

import math

import numpy as np

from .grid import GridSpec


def heat_cosine(
    grid: GridSpec,
    t: float,
    level: float,
    amplitude: float,
    mode: int = 1,
    d: float = 1.0,
) -> np.ndarray:
    """Neumann heat solution ``level + amplitude e^{-d lam t} prod_i cos(mode pi x_i / L_i)``.

    Returned on interior cell centers.
    """
    lam = sum((mode * math.pi / L) ** 2 for L in grid.lengths)
    prof = np.ones(grid.cells)
    for x, L in zip(grid.mesh(), grid.lengths):
        prof = prof * np.cos(mode * math.pi * x / L)
    return level + amplitude * math.exp(-d * lam * t) * prof


def barenblatt_exponents(m: float, dim: int) -> tuple[float, float, float]:
    """(alpha, beta, k) of the source-type solution of u_t = lap(u^m)."""
    alpha = dim / (dim * (m - 1.0) + 2.0)
    beta = alpha / dim
    k = alpha * (m - 1.0) / (2.0 * m * dim)
    return alpha, beta, k


def barenblatt(
    x: np.ndarray | tuple[np.ndarray, ...],
    t: float,
    m: float,
    C: float,
    center: tuple[float, ...],
) -> np.ndarray:
    """U(x, t) = t^-alpha (C - k |x - c|^2 t^(-2 beta))_+^(1/(m-1))."""
    coords = x if isinstance(x, tuple) else (x,)
    alpha, beta, k = barenblatt_exponents(m, len(coords))
    r2 = sum((xi - ci) ** 2 for xi, ci in zip(coords, center))
    core = np.maximum(C - k * r2 * t ** (-2.0 * beta), 0.0)
    return t ** (-alpha) * core ** (1.0 / (m - 1.0))


def barenblatt_radius(t: float, m: float, C: float, dim: int) -> float:
    _, beta, k = barenblatt_exponents(m, dim)
    return math.sqrt(C / k) * t ** beta
