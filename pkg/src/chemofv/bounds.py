"""Quantitative certificates checked against computed trajectories.

Two bounds are constructed here:

* a gradient bound for the signal built from Neumann heat-semigroup
  smoothing, ``C1 K + C1 M K (1 + sqrt(lam1 pi)) / lam1``, whose constant
  ``C1`` is calibrated numerically and therefore only *calibrated*, never
  certified;
* the exponential subsolution ``A exp(-B t)`` bounding the density from
  below on the second half of the run, with ``A = min(delta0, m_u(T/2))``
  and ``B = C_S K2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CoverageError, PreconditionError
from .grid import GridSpec, new_field
from .model import Linear, ModelSpec, SignalMode, compute_CS
from .probes import ProbeSeries, measure_K2, sup_grad
from .stepper import SimState, Snapshot, step_v

# Output of calibrate_C1() with its default arguments; see
# tests/test_bounds.py::test_default_C1_matches_calibration.
DEFAULT_C1 = 1.5793211591033272


def lambda1(grid: GridSpec) -> float:
    """First nonzero Neumann eigenvalue of -lap on the box."""
    return (math.pi / max(grid.lengths)) ** 2


def semigroup_gradient_bound(K_v0: float, M_u: float, lam1: float, C1: float) -> float:
    return C1 * K_v0 + C1 * M_u * K_v0 * (1.0 + math.sqrt(lam1 * math.pi)) / lam1


def calibrate_C1(
    length: float = 1.0,
    cells: int = 128,
    dt: float = 1e-4,
    t_max: float = 1.0,
) -> float:
    """Smallest C1 with |grad e^{t lap} v0| <= C1 (1 + t^-1/2) e^{-lam1 t} |v0| on a time sample.

    Heat flow is computed with the same implicit signal step the simulator
    uses (consumption mode with u = 0), starting from v0 = cos(pi x / L),
    and the ratio is evaluated after every step up to ``t_max``.
    """
    grid = GridSpec.interval(cells, length)
    (x,) = grid.centers()
    spec = ModelSpec(Linear(1.0), signal_mode=SignalMode.CONSUMPTION)
    v = new_field(grid, np.cos(math.pi * x / length))
    zero = new_field(grid, 0.0)
    v_sup = float(np.abs(v).max())
    lam = lambda1(grid)
    best = 0.0
    t = 0.0
    n = int(round(t_max / dt))
    for step in range(n):
        v = step_v(SimState(zero, v, t, step), spec, grid, dt)
        t = (step + 1) * dt
        ratio = sup_grad(v, grid) / ((1.0 + t ** -0.5) * math.exp(-lam * t) * v_sup)
        best = max(best, ratio)
    return best


@dataclass
class GradientBoundReport:
    C1: float
    lambda1: float
    bound: float
    measured_sup: float
    holds: bool
    status: str = "calibrated, not certified"


def check_gradient_bound(
    series: ProbeSeries,
    K_v0: float,
    M_u: float,
    lam1: float,
    C1: float = DEFAULT_C1,
) -> GradientBoundReport:
    if len(series) == 0:
        raise CoverageError("empty probe series")
    bound = semigroup_gradient_bound(K_v0, M_u, lam1, C1)
    measured = float(series.column("sup_grad_v").max())
    return GradientBoundReport(C1=C1, lambda1=lam1, bound=bound, measured_sup=measured, holds=measured <= bound)


@dataclass
class BoundCertificate:
    A: float
    B: float
    delta_u: float
    K2: float
    C_S: float
    M_u: float
    T: float
    min_margin: float
    holds: bool
    tolerance: float
    m_u_half: float
    checked_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def default_tolerance(grid: GridSpec, dt: float, u0_sup: float) -> float:
    """max(1e-8, 10 (h^2 + dt) |u0|_inf): room for the truncation error of the scheme."""
    return max(1e-8, 10.0 * (grid.h ** 2 + dt) * u0_sup)


def subsolution_certificate(
    series: ProbeSeries,
    snapshots: list[Snapshot] | list[tuple[float, np.ndarray]],
    spec: ModelSpec,
    T: float,
    delta0: float,
    tolerance: float,
) -> BoundCertificate:
    """Build A exp(-B t) and check it lies below u on the second half of [0, T].

    The check covers every recorded ``min_u`` with T/2 < t <= T and every cell
    of every snapshot in the same window.
    """
    if not T > 0:
        raise PreconditionError(f"T must be positive, got {T!r}")
    if not delta0 > 0:
        raise PreconditionError(f"delta0 must be positive, got {delta0!r}")
    t = series.column("t")
    min_u = series.column("min_u")
    first = t <= 0.5 * T
    if not np.any(first):
        raise CoverageError("no records on [0, T/2]")
    m_u_half = float(min_u[first].min())
    if not m_u_half > 0:
        raise PreconditionError("density is not positive on [0, T/2]; certificate inapplicable")

    A = min(delta0, m_u_half)
    M_u = float(series.column("max_u")[t <= T].max())
    C_S = compute_CS(spec, M_u)
    K2 = measure_K2(series, T)
    B = C_S * K2
    delta_u = A * math.exp(-B * T)

    margins = []
    window = (t > 0.5 * T) & (t <= T)
    margins.append(min_u[window] - A * np.exp(-B * t[window]))
    for snap in snapshots:
        ts, u = (snap.t, snap.u) if isinstance(snap, Snapshot) else snap
        if 0.5 * T < ts <= T:
            margins.append(np.ravel(np.asarray(u) - A * math.exp(-B * ts)))
    allm = np.concatenate(margins)
    min_margin = float(allm.min())
    return BoundCertificate(
        A=A,
        B=B,
        delta_u=delta_u,
        K2=K2,
        C_S=C_S,
        M_u=M_u,
        T=float(T),
        min_margin=min_margin,
        holds=min_margin >= -tolerance,
        tolerance=float(tolerance),
        m_u_half=m_u_half,
        checked_points=int(allm.size),
    )
