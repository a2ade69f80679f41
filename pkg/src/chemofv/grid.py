"""Uniform cell-centered boxes in one or two dimensions.

A field is a plain ``numpy`` array carrying one ghost layer on each side of
every axis, so a 1-D grid with ``n`` cells stores ``n + 2`` values and a 2-D
grid with ``nx x ny`` cells stores ``(nx + 2, ny + 2)``. Index ``[ix, iy]``
addresses the cell whose center is ``((ix - 0.5) hx, (iy - 0.5) hy)`` in
ghosted indexing. Corner ghosts are never read.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    dim: int
    lengths: tuple[float, ...]
    cells: tuple[int, ...]
    _spacing: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.lengths) != self.dim or len(self.cells) != self.dim:
            raise ValueError("lengths and cells need one entry per axis")
        if any(not L > 0 for L in self.lengths):
            raise ValueError("box lengths must be positive")
        if any(n < 4 for n in self.cells):
            raise ValueError("every axis needs at least 4 cells")
        object.__setattr__(self, "_spacing", tuple(L / n for L, n in zip(self.lengths, self.cells)))
        if self.dim == 2:
            hx, hy = self.spacing
            if max(hx, hy) > 4.0 * min(hx, hy):
                raise ValueError("cell spacings differ by more than a factor of 4")

    @classmethod
    def interval(cls, cells: int, length: float = 1.0) -> "GridSpec":
        return cls(1, (length,), (cells,))

    @classmethod
    def box(cls, cells_x: int, cells_y: int, length_x: float = 1.0, length_y: float = 1.0) -> "GridSpec":
        return cls(2, (length_x, length_y), (cells_x, cells_y))

    @property
    def spacing(self) -> tuple[float, ...]:
        return self._spacing

    @property
    def h(self) -> float:
        """Smallest spacing; the one that limits explicit time steps."""
        return min(self._spacing)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n + 2 for n in self.cells)

    @property
    def ncells(self) -> int:
        return int(np.prod(self.cells))

    def centers(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinates per axis (interior cells only)."""
        return tuple((np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.spacing))

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*self.centers(), indexing="ij")

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.dim, self.lengths, tuple(n * factor for n in self.cells))


def interior(field: np.ndarray) -> np.ndarray:
    """View of the interior cells of a ghosted field."""
    return field[(slice(1, -1),) * field.ndim]


def new_field(grid: GridSpec, values=0.0) -> np.ndarray:
    """Ghosted field with the given interior values and reflected ghosts."""
    out = np.zeros(grid.shape)
    interior(out)[...] = values
    return apply_neumann_ghosts(out)


def apply_neumann_ghosts(field: np.ndarray) -> np.ndarray:
    """Mirror the adjacent interior cell into every ghost cell (in place)."""
    if field.ndim == 1:
        field[0] = field[1]
        field[-1] = field[-2]
    else:
        field[0, 1:-1] = field[1, 1:-1]
        field[-1, 1:-1] = field[-2, 1:-1]
        field[1:-1, 0] = field[1:-1, 1]
        field[1:-1, -1] = field[1:-1, -2]
    return field


def laplacian(field: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Second-order centered Laplacian on interior cells (ghosts must be current).

    Returns a ghosted field whose ghosts are left at zero.
    """
    out = np.zeros_like(field)
    c = interior(field)
    if grid.dim == 1:
        (h,) = grid.spacing
        out[1:-1] = (field[2:] - 2.0 * c + field[:-2]) / (h * h)
    else:
        hx, hy = grid.spacing
        out[1:-1, 1:-1] = (field[2:, 1:-1] - 2.0 * c + field[:-2, 1:-1]) / (hx * hx) + (
            field[1:-1, 2:] - 2.0 * c + field[1:-1, :-2]
        ) / (hy * hy)
    return out


def grad_component(field: np.ndarray, grid: GridSpec, axis: int = 0) -> np.ndarray:
    """Face differences ``(f[i+1] - f[i]) / h`` along ``axis``, boundary faces included.

    For ``n`` cells along ``axis`` there are ``n + 1`` faces; in 2-D the
    other axis is restricted to interior cells.
    """
    h = grid.spacing[axis]
    if grid.dim == 1:
        return np.diff(field) / h
    if axis == 0:
        return np.diff(field[:, 1:-1], axis=0) / h
    return np.diff(field[1:-1, :], axis=1) / h


def integrate(field: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(interior(field)) * grid.cell_volume)
