"""Measured quantities consumed by the certificates.

sup norms, discrete gradient and Laplacian of the signal, a sampled parabolic
Hoelder seminorm, and dead-core sets.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError
from .grid import GridSpec, grad_component, integrate, interior, laplacian

CSV_COLUMNS = (
    "t",
    "min_u",
    "max_u",
    "sup_v",
    "sup_grad_v",
    "sup_lap_v",
    "mass_u",
    "mass_v",
    "deadcore_cells",
)


@dataclass
class ProbeSeries:
    t: list[float] = field(default_factory=list)
    min_u: list[float] = field(default_factory=list)
    max_u: list[float] = field(default_factory=list)
    sup_v: list[float] = field(default_factory=list)
    sup_grad_v: list[float] = field(default_factory=list)
    sup_lap_v: list[float] = field(default_factory=list)
    mass_u: list[float] = field(default_factory=list)
    mass_v: list[float] = field(default_factory=list)
    deadcore_cells: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def append(self, **row) -> None:
        if self.t and not row["t"] > self.t[-1]:
            raise ValueError(f"record times must increase: {row['t']} after {self.t[-1]}")
        for name in CSV_COLUMNS:
            getattr(self, name).append(row[name])

    def record(self, t: float, u: np.ndarray, v: np.ndarray, grid: GridSpec, epsilon: float) -> None:
        ui = interior(u)
        self.append(
            t=float(t),
            min_u=float(ui.min()),
            max_u=float(ui.max()),
            sup_v=float(np.abs(interior(v)).max()),
            sup_grad_v=sup_grad(v, grid),
            sup_lap_v=sup_laplacian(v, grid),
            mass_u=integrate(u, grid),
            mass_v=integrate(v, grid),
            deadcore_cells=int(np.count_nonzero(ui <= epsilon)),
        )

    def column(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for i in range(len(self)):
            cells = []
            for name in CSV_COLUMNS:
                x = getattr(self, name)[i]
                cells.append(str(int(x)) if name == "deadcore_cells" else repr(float(x)))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProbeSeries":
        lines = text.strip("\n").split("\n")
        if tuple(lines[0].split(",")) != CSV_COLUMNS:
            raise ValueError("unexpected probe CSV header")
        out = cls()
        for line in lines[1:]:
            vals = line.split(",")
            row = {name: (int(x) if name == "deadcore_cells" else float(x)) for name, x in zip(CSV_COLUMNS, vals)}
            out.append(**row)
        return out


def sup_grad(v: np.ndarray, grid: GridSpec) -> float:
    """Largest discrete gradient magnitude.

    In 1-D this is the largest face difference. In 2-D the face differences of
    each axis are averaged onto cell centers and combined in the Euclidean
    norm there.
    """
    if grid.dim == 1:
        return float(np.abs(grad_component(v, grid, 0)).max())
    gx = grad_component(v, grid, 0)
    gy = grad_component(v, grid, 1)
    cx = 0.5 * (gx[1:, :] + gx[:-1, :])
    cy = 0.5 * (gy[:, 1:] + gy[:, :-1])
    return float(np.sqrt(cx * cx + cy * cy).max())


def sup_laplacian(v: np.ndarray, grid: GridSpec) -> float:
    return float(np.abs(interior(laplacian(v, grid))).max())


def measure_K2(series: ProbeSeries, T: float, min_records: int = 10) -> float:
    """Largest recorded sup|lap v| on the second half (T/2, T] of the run."""
    t = series.column("t")
    sel = (t > 0.5 * T) & (t <= T)
    if np.count_nonzero(sel) < min_records:
        raise CoverageError(
            f"need {min_records} records in (T/2, T] with T={T!r}, found {int(np.count_nonzero(sel))}"
        )
    return float(series.column("sup_lap_v")[sel].max())


@dataclass
class HolderEstimate:
    theta: float
    seminorm: float
    pair_count: int


def holder_pairs(times: np.ndarray, grid: GridSpec, n_random: int = 100_000, seed: int = 0):
    """Index pairs into the flattened (time, cell) point set.

    All nearest neighbours in space and in time are included, followed by
    ``n_random`` uniformly drawn pairs with a fixed seed. Coincident points are
    dropped.
    """
    nt = len(times)
    shape = (nt,) + tuple(grid.cells)
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    a_parts, b_parts = [], []
    for axis in range(len(shape)):
        lo = [slice(None)] * len(shape)
        hi = [slice(None)] * len(shape)
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        a_parts.append(idx[tuple(lo)].ravel())
        b_parts.append(idx[tuple(hi)].ravel())
    rng = np.random.default_rng(seed)
    a_parts.append(rng.integers(0, idx.size, n_random))
    b_parts.append(rng.integers(0, idx.size, n_random))
    a = np.concatenate(a_parts)
    b = np.concatenate(b_parts)
    keep = a != b
    return a[keep], b[keep]


def holder_seminorm(
    snapshots: list[tuple[float, np.ndarray]],
    grid: GridSpec,
    theta: float,
    n_random: int = 100_000,
    seed: int = 0,
) -> HolderEstimate:
    """Sampled lower estimate of the parabolic C^{theta, theta/2} seminorm.

    ``snapshots`` holds ``(t, values)`` pairs where ``values`` are the interior
    cell values (a ghosted array is accepted too). The quotient is
    ``|u(x,t) - u(y,s)| / (|x-y|^2 + |t-s|)^(theta/2)``.
    """
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if len(snapshots) < 3:
        raise CoverageError("holder_seminorm needs at least 3 snapshots")
    times = np.array([float(t) for t, _ in snapshots])
    if np.any(np.diff(times) <= 0):
        raise CoverageError("snapshot times must be strictly increasing")
    values = []
    for _, u in snapshots:
        u = np.asarray(u, dtype=float)
        if u.shape == grid.shape:
            u = interior(u)
        if u.shape != tuple(grid.cells):
            raise CoverageError("snapshot shape does not match the grid")
        values.append(u)
    vals = np.stack(values).ravel()
    a, b = holder_pairs(times, grid, n_random, seed)

    shape = (len(times),) + tuple(grid.cells)
    ia = np.unravel_index(a, shape)
    ib = np.unravel_index(b, shape)
    dist2 = np.abs(times[ia[0]] - times[ib[0]])
    for axis, h in enumerate(grid.spacing):
        dist2 = dist2 + ((ia[axis + 1] - ib[axis + 1]) * h) ** 2
    quot = np.abs(vals[a] - vals[b]) / dist2 ** (0.5 * theta)
    return HolderEstimate(theta=float(theta), seminorm=float(quot.max()), pair_count=int(a.size))


def detect_dead_core(u: np.ndarray, epsilon: float, grid: GridSpec | None = None) -> list[tuple[int, ...]]:
    """Interior cells with u <= epsilon, as index tuples into the interior.

    Pass ``grid`` when ``u`` is a ghosted field; without it ``u`` is taken as
    interior values.
    """
    vals = interior(u) if grid is not None else np.asarray(u)
    return [tuple(int(i) for i in ix) for ix in np.argwhere(vals <= epsilon)]
