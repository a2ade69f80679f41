"""Positivity-preserving time integration.

Each step advances the density explicitly in flux form,

    u_i <- u_i + dt/h (F_{i+1/2} - F_{i-1/2}) + dt f(u_i, v_i),
    F = [Phi(u_R) - Phi(u_L)] / h - u_up S(u_up) (v_R - v_L) / h,

with the taxis term upwinded toward higher signal, and then advances the
signal by one backward-Euler step whose reaction coefficient is frozen at the
old density. The implicit matrix is a symmetric M-matrix for every dt > 0, so
the signal stays nonnegative and, under consumption, never exceeds its
previous maximum.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BlowUpError, CFLViolation, PreconditionError, SimulationError, SolverError
from .grid import GridSpec, apply_neumann_ghosts, interior
from .model import ModelSpec, SignalMode, eval_D, eval_f, eval_Phi, eval_S
from .probes import ProbeSeries

logger = logging.getLogger(__name__)

# Relative residual the signal solve must reach; anything looser is an error.
SOLVER_CONTRACT_RTOL = 1e-10


@dataclass
class SimState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    step: int = 0


@dataclass
class StepperConfig:
    t_end: float
    cfl_safety: float = 0.4
    dt_max: float = 1e-2
    blowup_threshold: float = 1e6
    deadcore_epsilon: float = 1e-12
    # The CG loop aims for this, accepting anything below SOLVER_CONTRACT_RTOL
    # once it stagnates. The max-principle check is at 1e-12 absolute, which a
    # 1e-10 residual does not guarantee.
    solver_rtol: float = 1e-13

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        for name in ("t_end", "dt_max", "blowup_threshold", "deadcore_epsilon", "solver_rtol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ProbeConfig:
    record_every: int = 10
    snapshot_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        self.snapshot_times = tuple(sorted(float(t) for t in self.snapshot_times))


class ExitReason(enum.Enum):
    COMPLETED = "completed"
    BLOW_UP = "blow_up"
    DEAD_CORE = "dead_core"
    CFL_VIOLATION = "cfl_violation"
    SOLVER_FAILURE = "solver_failure"
    NONFINITE = "nonfinite"


@dataclass
class Snapshot:
    t: float
    u: np.ndarray  # interior values
    v: np.ndarray


@dataclass
class RunResult:
    series: ProbeSeries
    snapshots: list[Snapshot]
    exit_reason: ExitReason
    state: SimState
    max_dt: float = 0.0
    message: str = ""
    failed_step: int | None = None
    # extrema over every step, not only recorded ones
    running_min_u: float = math.inf
    running_max_u: float = -math.inf
    running_max_v: float = -math.inf
    running_min_v: float = math.inf
    max_solver_residual: float = 0.0

    @property
    def T(self) -> float:
        return self.state.t


def _drift(s: np.ndarray, v: np.ndarray, grid: GridSpec) -> float:
    if grid.dim == 1:
        return float(_kernels.max_drift_1d(s, v, grid.spacing[0]))
    return float(_kernels.max_drift_2d(s, v, *grid.spacing))


def max_face_drift(u: np.ndarray, v: np.ndarray, spec: ModelSpec, grid: GridSpec) -> float:
    """max over faces of S(u_up) |v_R - v_L| / h."""
    s = np.ascontiguousarray(eval_S(spec, u))
    return _drift(s, np.ascontiguousarray(v), grid)


def _stable_dt(u, v, s, spec, grid, cfg, t, t_stop) -> float:
    # D is nondecreasing, so its max over the current range sits at max u
    d_max = float(eval_D(spec, float(interior(u).max())))
    h = grid.h
    rate = 2.0 * grid.dim * (d_max + h * _drift(s, v, grid))
    dt = cfg.dt_max if rate == 0 else min(cfg.dt_max, cfg.cfl_safety * h * h / rate)
    stop = cfg.t_end if t_stop is None else min(t_stop, cfg.t_end)
    return min(dt, stop - t)


def compute_dt(
    state: SimState,
    spec: ModelSpec,
    grid: GridSpec,
    cfg: StepperConfig,
    t_stop: float | None = None,
) -> float:
    """Explicit step size keeping the density update a convex combination.

    dt = safety * h^2 / (2 dim (D_max + h a_max)) where a_max is the largest
    face drift S(u_up)|dv|/h, capped by dt_max and by the time left to
    ``t_stop`` (default ``t_end``).
    """
    u, v = state.u, state.v
    if not (np.isfinite(u.sum()) and np.isfinite(v.sum())):
        raise BlowUpError("nonfinite values in the state", step=state.step, t=state.t)
    s = np.ascontiguousarray(eval_S(spec, u))
    return _stable_dt(u, np.ascontiguousarray(v), s, spec, grid, cfg, state.t, t_stop)


def _update_u(u, v, s, spec, grid, dt, step, t) -> np.ndarray:
    phi = eval_Phi(spec, u)
    out = np.empty(grid.cells)
    if grid.dim == 1:
        _kernels.flux_update_1d(u, phi, u * s, v, dt, grid.spacing[0], out)
    else:
        _kernels.flux_update_2d(u, phi, u * s, v, dt, *grid.spacing, out)
    if spec.has_source:
        out += dt * eval_f(spec, interior(u), np.maximum(interior(v), 0.0))
    if not out.min() >= 0:
        i = np.unravel_index(int(np.argmin(out)), out.shape)
        raise CFLViolation(
            f"negative density {out[i]!r} at cell {tuple(int(k) for k in i)} (dt={dt!r})",
            step=step,
            t=t,
        )
    new = np.zeros_like(u)
    interior(new)[...] = out
    return apply_neumann_ghosts(new)


def step_u(state: SimState, spec: ModelSpec, grid: GridSpec, dt: float) -> np.ndarray:
    """Explicit flux-form update of the density; returns a new ghosted field."""
    u = np.ascontiguousarray(state.u)
    s = np.ascontiguousarray(eval_S(spec, u))
    return _update_u(u, np.ascontiguousarray(state.v), s, spec, grid, dt, state.step, state.t)


def step_v(
    state: SimState,
    spec: ModelSpec,
    grid: GridSpec,
    dt: float,
    rtol: float = 1e-13,
    return_info: bool = False,
):
    """Backward-Euler signal step with the reaction frozen at the current density.

    Consumption:  (I - dt lap + dt diag(u)) v_new = v
    Keller-Segel: (I - dt lap + dt I) v_new = v + dt u
    """
    ui = np.ascontiguousarray(interior(state.u))
    vi = np.ascontiguousarray(interior(state.v))
    if spec.signal_mode is SignalMode.CONSUMPTION:
        coef, rhs = ui, vi
    else:
        coef, rhs = np.ones_like(ui), vi + dt * ui
    maxiter = 10 * grid.ncells
    accept = max(rtol, SOLVER_CONTRACT_RTOL)
    if grid.dim == 1:
        x, it, res, ok = _kernels.pcg_1d(coef, rhs, vi, dt, grid.spacing[0], rtol, accept, maxiter)
    else:
        hx, hy = grid.spacing
        x, it, res, ok = _kernels.pcg_2d(coef, rhs, vi, dt, hx, hy, rtol, accept, maxiter)
    if not ok:
        raise SolverError(
            f"signal solve stalled at relative residual {res!r} after {it} iterations",
            step=state.step,
            t=state.t,
        )
    new = np.zeros_like(state.v)
    interior(new)[...] = x
    apply_neumann_ghosts(new)
    if return_info:
        return new, it, res
    return new


def _check_initial_data(u0: np.ndarray, v0: np.ndarray, degenerate_ok: bool) -> None:
    ui, vi = interior(u0), interior(v0)
    if not (np.all(np.isfinite(ui)) and np.all(np.isfinite(vi))):
        raise PreconditionError("initial data must be finite")
    if degenerate_ok:
        if ui.min() < 0:
            raise PreconditionError("initial density must be nonnegative")
    elif not ui.min() > 0:
        raise PreconditionError("initial density must be bounded below by a positive floor")
    if vi.min() < 0:
        raise PreconditionError("initial signal must be nonnegative")
    if not vi.max() > 0:
        raise PreconditionError("initial signal must not vanish identically")


def run(
    u0: np.ndarray,
    v0: np.ndarray,
    spec: ModelSpec,
    grid: GridSpec,
    cfg: StepperConfig,
    probes: ProbeConfig | None = None,
    degenerate_ok: bool = False,
) -> RunResult:
    """Integrate from ``(u0, v0)`` (ghosted fields) until t_end or an exit event.

    Blow-up is declared when max u exceeds ``cfg.blowup_threshold`` and a
    dead-core when min u drops to ``cfg.deadcore_epsilon``. ``degenerate_ok``
    admits initial densities touching zero (reference solutions with compact
    support); dead-core detection is then off.
    """
    probes = probes or ProbeConfig()
    u0 = apply_neumann_ghosts(np.array(u0, dtype=float))
    v0 = apply_neumann_ghosts(np.array(v0, dtype=float))
    if u0.shape != grid.shape or v0.shape != grid.shape:
        raise PreconditionError(f"fields must have ghosted shape {grid.shape}")
    _check_initial_data(u0, v0, degenerate_ok)

    state = SimState(u0, v0)
    series = ProbeSeries()
    snaps: list[Snapshot] = []
    pending = [t for t in probes.snapshot_times if 0 <= t <= cfg.t_end]
    eps = cfg.deadcore_epsilon
    result = RunResult(series, snaps, ExitReason.COMPLETED, state)

    def observe(force: bool = False) -> None:
        ui, vi = interior(state.u), interior(state.v)
        result.running_min_u = min(result.running_min_u, float(ui.min()))
        result.running_max_u = max(result.running_max_u, float(ui.max()))
        result.running_min_v = min(result.running_min_v, float(vi.min()))
        result.running_max_v = max(result.running_max_v, float(vi.max()))
        if force or state.step % probes.record_every == 0:
            if not series.t or state.t > series.t[-1]:
                series.record(state.t, state.u, state.v, grid, eps)
        while pending and pending[0] <= state.t:
            if pending[0] == state.t:
                snaps.append(Snapshot(state.t, interior(state.u).copy(), interior(state.v).copy()))
            pending.pop(0)

    def exit_event() -> ExitReason | None:
        ui = interior(state.u)
        if ui.max() > cfg.blowup_threshold:
            return ExitReason.BLOW_UP
        if not degenerate_ok and ui.min() <= eps:
            return ExitReason.DEAD_CORE
        return None

    observe(force=True)
    reason = exit_event()
    while reason is None and state.t < cfg.t_end:
        t_stop = pending[0] if pending else cfg.t_end
        try:
            u, v = state.u, state.v
            if not (np.isfinite(u.sum()) and np.isfinite(v.sum())):
                raise BlowUpError("nonfinite values in the state", step=state.step, t=state.t)
            s = eval_S(spec, u)
            dt = _stable_dt(u, v, s, spec, grid, cfg, state.t, t_stop)
            u_new = _update_u(u, v, s, spec, grid, dt, state.step, state.t)
            v_new, _, res = step_v(state, spec, grid, dt, cfg.solver_rtol, return_info=True)
        except SimulationError as exc:
            result.exit_reason = {
                CFLViolation: ExitReason.CFL_VIOLATION,
                SolverError: ExitReason.SOLVER_FAILURE,
                BlowUpError: ExitReason.NONFINITE,
            }[type(exc)]
            result.message = str(exc)
            result.failed_step = state.step
            logger.warning("run aborted at step %d: %s", state.step, exc)
            if state.t > series.t[-1]:
                series.record(state.t, state.u, state.v, grid, eps)
            return result
        result.max_dt = max(result.max_dt, dt)
        result.max_solver_residual = max(result.max_solver_residual, res)
        t_new = state.t + dt
        if dt == t_stop - state.t:
            t_new = t_stop
        state.u, state.v, state.t, state.step = u_new, v_new, t_new, state.step + 1
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
            result.exit_reason = ExitReason.NONFINITE
            result.failed_step = state.step
            result.message = "nonfinite values after step"
            return result
        reason = exit_event()
        observe(force=reason is not None or state.t >= cfg.t_end)
    if reason is not None:
        result.exit_reason = reason
        result.message = f"{reason.value} at t={state.t!r}, step {state.step}"
    return result
