"""Command-line front end: ``sim run|certify|convergence|validate-model``.

Exit codes:

    0  run completed (and the subsolution certificate holds, when checked)
    1  usage or config error
    2  certificate violated, or model outside the admissible class
    3  blow-up threshold exceeded
    4  dead core detected
    5  numerical failure (step-size violation, signal solve, nonfinite state)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import (
    DEFAULT_C1,
    BoundCertificate,
    GradientBoundReport,
    check_gradient_bound,
    default_tolerance,
    lambda1,
    subsolution_certificate,
)
from .config import RunConfig, initial_fields, initial_norms, load_config
from .errors import ConfigError, CoverageError, PreconditionError
from .grid import GridSpec, interior
from .model import SignalMode, validate_hypotheses
from .probes import HolderEstimate, holder_seminorm
from .references import barenblatt, barenblatt_radius, heat_cosine
from .stepper import ExitReason, RunResult, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERTIFICATE = 2
EXIT_BLOWUP = 3
EXIT_DEADCORE = 4
EXIT_NUMERICAL = 5

_EXIT_BY_REASON = {
    ExitReason.BLOW_UP: EXIT_BLOWUP,
    ExitReason.DEAD_CORE: EXIT_DEADCORE,
    ExitReason.CFL_VIOLATION: EXIT_NUMERICAL,
    ExitReason.SOLVER_FAILURE: EXIT_NUMERICAL,
    ExitReason.NONFINITE: EXIT_NUMERICAL,
}


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    config: RunConfig
    result: RunResult
    K_u0: float
    K_v0: float
    certificate: BoundCertificate | None
    gradient: GradientBoundReport | None
    holder: HolderEstimate | None
    status: str

    @property
    def exit_code(self) -> int:
        if self.result.exit_reason in _EXIT_BY_REASON:
            return _EXIT_BY_REASON[self.result.exit_reason]
        if self.certificate is not None and not self.certificate.holds:
            return EXIT_CERTIFICATE
        return EXIT_OK

    def summary(self) -> dict:
        """JSON-ready summary; nonfinite numbers become null."""
        cert = self.certificate.to_dict() if self.certificate else {}
        keys = ("A", "B", "delta_u", "K2", "C_S", "M_u", "T", "min_margin", "holds", "tolerance")
        out = {k: cert.get(k) for k in keys}
        out["T"] = self.result.T
        grad = self.gradient
        out["C1"] = grad.C1 if grad else self.config.certificate.C1 or DEFAULT_C1
        out["lambda1"] = lambda1(self.config.grid)
        out["gradient_bound_holds"] = grad.holds if grad else None
        out["gradient_bound"] = grad.bound if grad else None
        out["gradient_measured_sup"] = grad.measured_sup if grad else None
        out["gradient_bound_status"] = grad.status if grad else None
        out["K_u0"] = self.K_u0
        out["K_v0"] = self.K_v0
        out["exit_reason"] = self.result.exit_reason.value
        out["steps"] = self.result.state.step
        out["running_min_u"] = self.result.running_min_u
        out["running_max_u"] = self.result.running_max_u
        out["running_max_v"] = self.result.running_max_v
        if self.result.exit_reason is ExitReason.BLOW_UP:
            # Only a proxy: the threshold is finite, the blow-up time is not observable.
            out["t_max_proxy"] = self.result.T
        if self.holder is not None:
            out["holder_theta"] = self.holder.theta
            out["holder_seminorm"] = self.holder.seminorm
            out["holder_pairs"] = self.holder.pair_count
        if self.certificate is not None:
            out["tolerance_source"] = (
                "config" if self.config.certificate.tolerance is not None
                else "heuristic max(1e-8, 10 (h^2 + dt) |u0|_inf)"
            )
            out["m_u_half"] = self.certificate.m_u_half
            out["checked_points"] = self.certificate.checked_points
        out["status"] = self.status
        return {k: _clean(v) for k, v in out.items()}


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def simulate(cfg: RunConfig) -> Outcome:
    """Run the configured scenario and evaluate every applicable check."""
    u0, v0 = initial_fields(cfg)
    K_u0, K_v0 = initial_norms(cfg)
    degenerate = cfg.initial.u0.kind == "barenblatt"
    try:
        res = run(u0, v0, cfg.model, cfg.grid, cfg.stepper, cfg.probe_config, degenerate_ok=degenerate)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None

    cert = grad = holder = None
    notes = []
    if res.exit_reason is not ExitReason.COMPLETED:
        notes.append(res.message or res.exit_reason.value)
    if res.exit_reason is ExitReason.COMPLETED and not degenerate:
        tol = cfg.certificate.tolerance
        if tol is None:
            tol = default_tolerance(cfg.grid, res.max_dt, K_u0)
        try:
            cert = subsolution_certificate(res.series, res.snapshots, cfg.model, res.T, cfg.initial.delta0, tol)
            notes.append("certificate holds" if cert.holds else "certificate violated")
        except (CoverageError, PreconditionError) as exc:
            raise UsageError(f"certificate cannot be evaluated: {exc}") from None
    elif degenerate:
        notes.append("degenerate reference data: no certificate")
    if cfg.model.signal_mode is SignalMode.CONSUMPTION and len(res.series):
        C1 = cfg.certificate.C1 or DEFAULT_C1
        M_u = max(res.running_max_u, 0.0)
        grad = check_gradient_bound(res.series, K_v0, M_u, lambda1(cfg.grid), C1)
    if cfg.probes.holder_theta is not None:
        snaps = [(s.t, s.u) for s in res.snapshots]
        try:
            holder = holder_seminorm(snaps, cfg.grid, cfg.probes.holder_theta)
        except CoverageError as exc:
            notes.append(f"holder estimate skipped: {exc}")
    return Outcome(cfg, res, K_u0, K_v0, cert, grad, holder, "; ".join(notes))


# -- output -----------------------------------------------------------------

def output_dir(cfg: RunConfig) -> Path:
    return Path(os.environ.get("SIM_OUTPUT_DIR") or cfg.output.directory)


def format_snapshot(t: float, values: np.ndarray) -> str:
    """``# t=<t> nx=<nx> [ny=<ny>]`` then one line per x index (row-major)."""
    vals = np.asarray(values)
    head = f"# t={float(t)!r} nx={vals.shape[0]}"
    if vals.ndim == 2:
        head += f" ny={vals.shape[1]}"
        rows = [" ".join(repr(float(x)) for x in row) for row in vals]
    else:
        rows = [repr(float(x)) for x in vals]
    return head + "\n" + "\n".join(rows) + "\n"


def parse_snapshot(text: str) -> tuple[float, np.ndarray]:
    lines = text.strip("\n").split("\n")
    fields = dict(item.split("=") for item in lines[0].lstrip("#").split())
    vals = np.array([[float(x) for x in line.split()] for line in lines[1:]])
    shape = (int(fields["nx"]),) + ((int(fields["ny"]),) if "ny" in fields else ())
    return float(fields["t"]), vals.reshape(shape)


def _write(path: Path, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def write_outputs(out: Outcome, directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    prefix = out.config.output.prefix
    written = []
    path = directory / f"{prefix}_probes.csv"
    _write(path, out.result.series.to_csv())
    written.append(path)
    for k, snap in enumerate(out.result.snapshots):
        for name, vals in (("u", snap.u), ("v", snap.v)):
            path = directory / f"{prefix}_{name}_{k:04d}.txt"
            _write(path, format_snapshot(snap.t, vals))
            written.append(path)
    path = directory / f"{prefix}_summary.json"
    _write(path, json.dumps(out.summary(), indent=2) + "\n")
    written.append(path)
    return written


# -- commands ---------------------------------------------------------------

def cmd_run(config: str) -> int:
    cfg = load_config(config)
    out = simulate(cfg)
    write_outputs(out, output_dir(cfg))
    print(f"{out.result.exit_reason.value}: {out.status}")
    return out.exit_code


def cmd_certify(config: str) -> int:
    cfg = load_config(config)
    out = simulate(cfg)
    print(json.dumps(out.summary(), indent=2))
    return out.exit_code


def reference_solution(cfg: RunConfig, grid: GridSpec, t: float) -> np.ndarray:
    p = cfg.initial.u0
    if cfg.reference == "heat":
        return heat_cosine(grid, t, p["level"], p["amplitude"], int(p["mode"]), cfg.model.diffusion.d)
    if cfg.reference == "barenblatt":
        center = (p["center_x"], p["center_y"])[: grid.dim]
        return barenblatt(tuple(grid.mesh()), p["t0"] + t, cfg.model.diffusion.m, p["C"], center)
    raise UsageError("scenario has no analytic reference (needs a heat cosine mode or a Barenblatt profile)")


def _check_support(cfg: RunConfig) -> None:
    """The Barenblatt comparison is only meaningful before the support reaches a wall."""
    p = cfg.initial.u0
    center = (p["center_x"], p["center_y"])[: cfg.grid.dim]
    radius = barenblatt_radius(p["t0"] + cfg.stepper.t_end, cfg.model.diffusion.m, p["C"], cfg.grid.dim)
    gap = min(min(c, L - c) for c, L in zip(center, cfg.grid.lengths))
    if radius >= gap:
        raise UsageError(f"Barenblatt support (radius {radius:.4g}) reaches the boundary before t_end")


def convergence_table(cfg: RunConfig, levels: int) -> list[dict]:
    """Errors at t_end on ``levels`` dyadic refinements of the configured grid."""
    if levels < 2:
        raise UsageError("--levels must be at least 2")
    if cfg.reference is None:
        raise UsageError("scenario has no analytic reference (needs a heat cosine mode or a Barenblatt profile)")
    if cfg.reference == "barenblatt":
        _check_support(cfg)
    rows: list[dict] = []
    for k in range(levels):
        level_cfg = cfg.with_grid(cfg.grid.refined(2**k))
        grid = level_cfg.grid
        u0, v0 = initial_fields(level_cfg)
        res = run(u0, v0, cfg.model, grid, cfg.stepper, level_cfg.probe_config,
                  degenerate_ok=cfg.reference == "barenblatt")
        if res.exit_reason is not ExitReason.COMPLETED:
            raise UsageError(f"level {k} did not complete: {res.message}")
        err = interior(res.state.u) - reference_solution(cfg, grid, res.T)
        row = {
            "level": k,
            "cells": grid.cells[0],
            "h": grid.h,
            "max_dt": res.max_dt,
            "linf_error": float(np.abs(err).max()),
            "l1_error": float(np.abs(err).sum() * grid.cell_volume),
            "linf_order": None,
            "l1_order": None,
        }
        if rows:
            for name in ("linf", "l1"):
                prev, cur = rows[-1][f"{name}_error"], row[f"{name}_error"]
                row[f"{name}_order"] = math.log2(prev / cur) if cur > 0 and prev > 0 else None
        rows.append(row)
    return rows


CONVERGENCE_COLUMNS = ("level", "cells", "h", "max_dt", "linf_error", "l1_error", "linf_order", "l1_order")


def format_table(rows: list[dict]) -> str:
    lines = [",".join(CONVERGENCE_COLUMNS)]
    for row in rows:
        cells = []
        for c in CONVERGENCE_COLUMNS:
            x = row[c]
            cells.append("" if x is None else repr(x) if isinstance(x, float) else str(x))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_convergence(config: str, levels: int) -> int:
    cfg = load_config(config)
    table = format_table(convergence_table(cfg, levels))
    directory = output_dir(cfg)
    directory.mkdir(parents=True, exist_ok=True)
    _write(directory / f"{cfg.output.prefix}_convergence.csv", table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_validate_model(config: str) -> int:
    cfg = load_config(config)
    report = validate_hypotheses(cfg.model)
    print("\n".join(report.lines()))
    return EXIT_OK if report.admissible else EXIT_CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Chemotaxis-consumption finite-volume simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run a scenario and write probes, snapshots and the summary JSON"),
        ("certify", "run a scenario and print the certificate summary only"),
        ("validate-model", "check the structural hypotheses on the diffusion"),
        ("convergence", "refinement study against a closed-form solution"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="config file, or the name of a catalog scenario")
        if name == "convergence":
            p.add_argument("--levels", type=int, default=3, help="number of dyadic refinements (>= 2)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "run":
            return cmd_run(args.config)
        if args.command == "certify":
            return cmd_certify(args.config)
        if args.command == "validate-model":
            return cmd_validate_model(args.config)
        return cmd_convergence(args.config, args.levels)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
    except (UsageError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
