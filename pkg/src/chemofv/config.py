"""INI run configurations and the shipped scenario catalog.

A config has the sections ``[grid]``, ``[model]``, ``[stepper]``,
``[initial]``, ``[probes]``, ``[certificate]`` and ``[output]``; only
``[grid]``, ``[model]``, ``[stepper]`` and ``[initial]`` are required.
Every problem in a file is collected and reported at once, each with the
line it sits on when it has one.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .grid import GridSpec, interior, new_field
from .model import (
    Constant,
    Custom,
    Linear,
    Logistic,
    ModelSpec,
    PorousMedium,
    Saturating,
    SignalMode,
    ZeroSource,
)
from .probes import sup_grad
from .references import barenblatt
from .stepper import ProbeConfig, StepperConfig

CATALOG = (
    "consumption_1d_baseline",
    "consumption_2d_baseline",
    "near_deadcore_1d",
    "kellersegel_1d",
    "heat_mms",
    "barenblatt_pm2",
)

# Parameters of each initial profile, with defaults (None = required).
U0_PROFILES: dict[str, dict[str, float | None]] = {
    "constant": {"value": None},
    "cosine_bump": {"level": None, "amplitude": None, "mode": 1.0},
    "gaussian_dip": {"floor": None, "base": 1.0, "width": None, "center_x": 0.5, "center_y": 0.5},
    "barenblatt": {"C": None, "t0": None, "center_x": 0.5, "center_y": 0.5},
}
V0_PROFILES: dict[str, dict[str, float | None]] = {
    "constant": {"value": None},
    "cosine_bump": {"level": None, "amplitude": None, "mode": 1.0},
    "gaussian": {"offset": None, "amplitude": None, "width": None, "center_x": 0.5, "center_y": 0.5},
}


@dataclass(frozen=True)
class Profile:
    kind: str
    params: tuple[tuple[str, float], ...]

    def __getitem__(self, key: str) -> float:
        return dict(self.params)[key]


@dataclass(frozen=True)
class InitialConfig:
    u0: Profile
    v0: Profile

    @property
    def delta0(self) -> float:
        """Analytic lower bound of u0 (0 for compactly supported profiles)."""
        return _profile_floor(self.u0)


@dataclass(frozen=True)
class ProbesConfig:
    record_every: int = 10
    snapshot_times: tuple[float, ...] = ()
    holder_theta: float | None = None


@dataclass(frozen=True)
class CertificateConfig:
    C1: float | None = None
    tolerance: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "."
    prefix: str = "run"


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    model: ModelSpec
    stepper: StepperConfig
    initial: InitialConfig
    probes: ProbesConfig = ProbesConfig()
    certificate: CertificateConfig = CertificateConfig()
    output: OutputConfig = OutputConfig()

    @property
    def probe_config(self) -> ProbeConfig:
        return ProbeConfig(self.probes.record_every, self.probes.snapshot_times)

    @property
    def reference(self) -> str | None:
        """Name of the closed-form solution this run can be compared with, if any."""
        model = self.model
        passive = (
            isinstance(model.sensitivity, Constant)
            and model.sensitivity.chi == 0
            and not model.has_source
        )
        if not passive:
            return None
        if self.initial.u0.kind == "cosine_bump" and isinstance(model.diffusion, Linear):
            return "heat"
        if self.initial.u0.kind == "barenblatt" and isinstance(model.diffusion, PorousMedium):
            return "barenblatt"
        return None

    def with_grid(self, grid: GridSpec) -> "RunConfig":
        return RunConfig(grid, self.model, self.stepper, self.initial, self.probes, self.certificate, self.output)


# -- realizing initial data -------------------------------------------------

def _profile_floor(p: Profile) -> float:
    if p.kind == "constant":
        return p["value"]
    if p.kind == "cosine_bump":
        return p["level"] - abs(p["amplitude"])
    if p.kind == "gaussian_dip":
        return min(p["floor"], p["base"])
    if p.kind == "gaussian":
        return p["offset"] + min(p["amplitude"], 0.0)
    return 0.0


def _gaussian(grid: GridSpec, p: Profile) -> np.ndarray:
    center = (p["center_x"], p["center_y"])[: grid.dim]
    r2 = sum((x - c) ** 2 for x, c in zip(grid.mesh(), center))
    return np.exp(-r2 / (2.0 * p["width"] ** 2))


def realize(p: Profile, grid: GridSpec, model: ModelSpec | None = None) -> np.ndarray:
    """Ghosted field holding the profile sampled at cell centers."""
    if p.kind == "constant":
        vals = np.full(grid.cells, p["value"])
    elif p.kind == "cosine_bump":
        prof = np.ones(grid.cells)
        for x, L in zip(grid.mesh(), grid.lengths):
            prof = prof * np.cos(p["mode"] * math.pi * x / L)
        vals = p["level"] + p["amplitude"] * prof
    elif p.kind == "gaussian_dip":
        vals = p["base"] - (p["base"] - p["floor"]) * _gaussian(grid, p)
    elif p.kind == "gaussian":
        vals = p["offset"] + p["amplitude"] * _gaussian(grid, p)
    elif p.kind == "barenblatt":
        if model is None or not isinstance(model.diffusion, PorousMedium):
            raise ValueError("barenblatt profile needs porous-medium diffusion")
        center = (p["center_x"], p["center_y"])[: grid.dim]
        vals = barenblatt(tuple(grid.mesh()), p["t0"], model.diffusion.m, p["C"], center)
    else:
        raise ValueError(f"unknown profile {p.kind!r}")
    return new_field(grid, vals)


def initial_fields(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    return realize(cfg.initial.u0, cfg.grid, cfg.model), realize(cfg.initial.v0, cfg.grid, cfg.model)


def initial_norms(cfg: RunConfig) -> tuple[float, float]:
    """(K_u0, K_v0): sup norm of u0 and W^{1,inf} norm (sup + sup gradient) of v0."""
    u0, v0 = initial_fields(cfg)
    return float(np.abs(interior(u0)).max()), float(np.abs(interior(v0)).max()) + sup_grad(v0, cfg.grid)


# -- parsing ----------------------------------------------------------------

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:\s#;][^=:]*?)\s*[=:]")


def _line_map(text: str) -> tuple[dict[str, int], dict[tuple[str, str], int]]:
    sections: dict[str, int] = {}
    keys: dict[tuple[str, str], int] = {}
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            current = m.group(1).strip()
            sections.setdefault(current, n)
            continue
        m = _KEY_RE.match(line)
        if m and current is not None and not line[:1].isspace():
            keys.setdefault((current, m.group(1).strip()), n)
    return sections, keys


class _Reader:
    """Typed access to one parsed file that records problems instead of raising."""

    def __init__(self, parser: configparser.ConfigParser, sections, keys):
        self.parser = parser
        self.sections = sections
        self.keys = keys
        self.problems: list[tuple[int | None, str]] = []
        self.used: set[tuple[str, str]] = set()

    def line(self, section: str, key: str | None = None) -> int | None:
        if key is None:
            return self.sections.get(section)
        return self.keys.get((section, key), self.sections.get(section))

    def error(self, section: str, key: str | None, msg: str) -> None:
        where = f"[{section}] {key}: " if key else f"[{section}]: "
        self.problems.append((self.line(section, key), where + msg))

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def raw(self, section: str, key: str, required: bool) -> str | None:
        self.used.add((section, key))
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if required:
            self.problems.append((self.line(section), f"[{section}]: missing required key '{key}'"))
        return None

    def number(self, section, key, default=None, required=False, kind=float):
        text = self.raw(section, key, required)
        if text is None:
            return default
        try:
            val = kind(text)
        except ValueError:
            self.error(section, key, f"expected {'an integer' if kind is int else 'a number'}, got {text!r}")
            return default
        if kind is float and not math.isfinite(val):
            self.error(section, key, "must be finite")
            return default
        return val

    def choice(self, section, key, options, default=None):
        text = self.raw(section, key, default is None)
        if text is None:
            return default
        if text not in options:
            self.error(section, key, f"expected one of {', '.join(options)}, got {text!r}")
            return None
        return text


def _parse_grid(r: _Reader) -> GridSpec | None:
    dim = r.number("grid", "dim", 1, kind=int)
    if dim not in (1, 2):
        r.error("grid", "dim", f"must be 1 or 2, got {dim}")
        return None
    lengths = [r.number("grid", "length_x", 1.0)]
    cells = [r.number("grid", "cells_x", required=True, kind=int)]
    if dim == 2:
        lengths.append(r.number("grid", "length_y", 1.0))
        cells.append(r.number("grid", "cells_y", required=True, kind=int))
    if None in cells:
        return None
    try:
        return GridSpec(dim, tuple(lengths), tuple(cells))
    except ValueError as exc:
        r.error("grid", None, str(exc))
        return None


def _parse_table(r: _Reader, text: str) -> tuple[tuple[float, float], ...] | None:
    try:
        pairs = []
        for item in text.split(","):
            s, d = item.split(":")
            pairs.append((float(s), float(d)))
        return tuple(pairs)
    except ValueError:
        r.error("model", "table", f"expected 's:D, s:D, ...', got {text!r}")
        return None


def _parse_model(r: _Reader) -> ModelSpec | None:
    ok = True
    kind = r.choice("model", "diffusion", ("porous_medium", "linear", "custom"))
    diffusion = None
    try:
        if kind == "porous_medium":
            m = r.number("model", "m", required=True)
            diffusion = PorousMedium(m) if m is not None else None
        elif kind == "linear":
            diffusion = Linear(r.number("model", "d", 1.0))
        elif kind == "custom":
            text = r.raw("model", "table", True)
            table = _parse_table(r, text) if text is not None else None
            diffusion = Custom(table) if table is not None else None
    except DomainError as exc:
        r.error("model", "diffusion", str(exc))
    ok &= diffusion is not None

    chi = r.number("model", "chi", 1.0)
    kappa = r.number("model", "kappa")
    try:
        sens = Constant(chi) if kappa is None else Saturating(chi, kappa)
    except DomainError as exc:
        r.error("model", "chi", str(exc))
        ok = False

    src_kind = r.choice("model", "source", ("zero", "logistic"), "zero")
    try:
        if src_kind == "logistic":
            source = Logistic(r.number("model", "r", 1.0), r.number("model", "K", 1.0))
        else:
            source = ZeroSource()
    except DomainError as exc:
        r.error("model", "source", str(exc))
        ok = False

    mode = r.choice("model", "signal_mode", tuple(m.value for m in SignalMode), "consumption")
    s0 = r.number("model", "s0", 1.0)
    p = r.number("model", "p")
    if not ok or mode is None or src_kind is None:
        return None
    try:
        return ModelSpec(diffusion, sens, source, SignalMode(mode), s0, p)
    except DomainError as exc:
        r.error("model", None, str(exc))
        return None


def _parse_stepper(r: _Reader) -> StepperConfig | None:
    kw = {"t_end": r.number("stepper", "t_end", required=True)}
    for name in ("cfl_safety", "dt_max", "blowup_threshold", "deadcore_epsilon", "solver_rtol"):
        val = r.number("stepper", name)
        if val is not None:
            kw[name] = val
    if kw["t_end"] is None:
        return None
    try:
        return StepperConfig(**kw)
    except ValueError as exc:
        r.error("stepper", None, str(exc))
        return None


def _parse_profile(r: _Reader, which: str, table) -> Profile | None:
    kind = r.choice("initial", which, tuple(table))
    if kind is None:
        return None
    params = []
    for name, default in table[kind].items():
        val = r.number("initial", f"{which}_{name}", default, required=default is None)
        if val is None:
            return None
        params.append((name, val))
    return Profile(kind, tuple(params))


def _check_profiles(r: _Reader, u0: Profile | None, v0: Profile | None) -> None:
    if u0 is not None:
        if u0.kind == "barenblatt":
            if not (u0["C"] > 0 and u0["t0"] > 0):
                r.error("initial", "u0", "barenblatt needs C > 0 and t0 > 0")
        elif not _profile_floor(u0) > 0:
            key = {"constant": "u0_value", "cosine_bump": "u0_level", "gaussian_dip": "u0_floor"}[u0.kind]
            r.error("initial", key, f"initial floor must be positive (got {_profile_floor(u0)!r})")
        if u0.kind == "gaussian_dip" and not u0["width"] > 0:
            r.error("initial", "u0_width", "must be positive")
    if v0 is not None:
        if v0.kind == "gaussian" and not v0["width"] > 0:
            r.error("initial", "v0_width", "must be positive")
        if _profile_floor(v0) < 0:
            r.error("initial", "v0", "initial signal must be nonnegative")
        vanishes = {
            "constant": lambda: v0["value"] == 0,
            "cosine_bump": lambda: v0["level"] == 0 and v0["amplitude"] == 0,
            "gaussian": lambda: v0["offset"] == 0 and v0["amplitude"] == 0,
        }[v0.kind]()
        if vanishes:
            r.error("initial", "v0", "v₀ ≢ 0 is required; the initial signal vanishes identically")


def _parse_probes(r: _Reader) -> ProbesConfig:
    every = r.number("probes", "record_every", 10, kind=int)
    if every < 1:
        r.error("probes", "record_every", "must be at least 1")
        every = 10
    times: tuple[float, ...] = ()
    text = r.raw("probes", "snapshot_times", False)
    if text:
        try:
            times = tuple(float(x) for x in text.split(","))
        except ValueError:
            r.error("probes", "snapshot_times", f"expected a comma-separated list of numbers, got {text!r}")
        if any(not (math.isfinite(t) and t >= 0) for t in times):
            r.error("probes", "snapshot_times", "times must be finite and nonnegative")
    theta = r.number("probes", "holder_theta")
    if theta is not None and not 0 < theta < 1:
        r.error("probes", "holder_theta", "must lie in (0, 1)")
    return ProbesConfig(every, tuple(sorted(times)), theta)


def _parse_certificate(r: _Reader) -> CertificateConfig:
    C1 = r.number("certificate", "C1")
    tol = r.number("certificate", "tolerance")
    if C1 is not None and not C1 > 0:
        r.error("certificate", "C1", "must be positive")
    if tol is not None and not tol >= 0:
        r.error("certificate", "tolerance", "must be nonnegative")
    return CertificateConfig(C1, tol)


def _parse_output(r: _Reader) -> OutputConfig:
    prefix = r.raw("output", "prefix", False) or "run"
    if "/" in prefix or "\\" in prefix:
        r.error("output", "prefix", "must not contain path separators")
    return OutputConfig(r.raw("output", "directory", False) or ".", prefix)


_SECTIONS = ("grid", "model", "stepper", "initial", "probes", "certificate", "output")
_REQUIRED_SECTIONS = ("grid", "model", "stepper", "initial")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run config; raise ConfigError listing every problem."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([(getattr(exc, "lineno", None), f"syntax error: {exc.message}")]) from None
    sections, keys = _line_map(text)
    r = _Reader(parser, sections, keys)

    for name in parser.sections():
        if name not in _SECTIONS:
            r.error(name, None, "unknown section")
    missing = [s for s in _REQUIRED_SECTIONS if not parser.has_section(s)]
    for s in missing:
        r.problems.append((None, f"missing required section [{s}]"))
    for s in _SECTIONS:
        if not parser.has_section(s):
            parser.add_section(s)

    grid = _parse_grid(r)
    model = _parse_model(r)
    stepper = _parse_stepper(r)
    u0 = _parse_profile(r, "u0", U0_PROFILES)
    v0 = _parse_profile(r, "v0", V0_PROFILES)
    _check_profiles(r, u0, v0)
    if u0 is not None and u0.kind == "barenblatt" and model is not None:
        if not isinstance(model.diffusion, PorousMedium):
            r.error("initial", "u0", "barenblatt profile needs porous-medium diffusion")
    probes = _parse_probes(r)
    cert = _parse_certificate(r)
    output = _parse_output(r)

    for s in _SECTIONS:
        for key in parser.options(s):
            if (s, key) not in r.used:
                r.error(s, key, "unknown key")
    if r.problems:
        r.problems.sort(key=lambda p: (p[0] is None, p[0] or 0))
        raise ConfigError(r.problems)
    return RunConfig(grid, model, stepper, InitialConfig(u0, v0), probes, cert, output)


def load_config(path_or_name: str) -> RunConfig:
    """Parse a config file, or a catalog scenario when given a bare scenario name."""
    return parse_config(read_config_text(path_or_name))


def read_config_text(path_or_name: str) -> str:
    path = Path(path_or_name)
    if path.is_file():
        return path.read_text()
    if path_or_name in CATALOG:
        return resources.files("chemofv").joinpath("scenarios", f"{path_or_name}.ini").read_text()
    raise FileNotFoundError(f"no config file or catalog scenario named {path_or_name!r}")


# -- serialization ----------------------------------------------------------

def _fmt(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def to_ini(cfg: RunConfig) -> str:
    """Serialize so that parse_config(to_ini(cfg)) == cfg."""
    out: list[str] = []

    def section(name, items):
        out.append(f"[{name}]")
        out.extend(f"{k} = {_fmt(v)}" for k, v in items if v is not None)
        out.append("")

    g = cfg.grid
    grid_items = [("dim", g.dim), ("length_x", g.lengths[0]), ("cells_x", g.cells[0])]
    if g.dim == 2:
        grid_items += [("length_y", g.lengths[1]), ("cells_y", g.cells[1])]
    section("grid", grid_items)

    m = cfg.model
    d = m.diffusion
    items: list[tuple[str, object]] = []
    if isinstance(d, PorousMedium):
        items += [("diffusion", "porous_medium"), ("m", float(d.m))]
    elif isinstance(d, Linear):
        items += [("diffusion", "linear"), ("d", float(d.d))]
    else:
        table = ", ".join(f"{s!r}:{v!r}" for s, v in d.table)
        items += [("diffusion", "custom"), ("table", table)]
    items.append(("chi", float(m.sensitivity.chi)))
    if isinstance(m.sensitivity, Saturating):
        items.append(("kappa", float(m.sensitivity.kappa)))
    if isinstance(m.source, Logistic):
        items += [("source", "logistic"), ("r", float(m.source.r)), ("K", float(m.source.K))]
    else:
        items.append(("source", "zero"))
    items += [("signal_mode", m.signal_mode.value), ("s0", float(m.s0)), ("p", float(m.p))]
    section("model", items)

    st = cfg.stepper
    section(
        "stepper",
        [(k, float(getattr(st, k))) for k in ("t_end", "cfl_safety", "dt_max", "blowup_threshold", "deadcore_epsilon", "solver_rtol")],
    )

    init = []
    for which, prof in (("u0", cfg.initial.u0), ("v0", cfg.initial.v0)):
        init.append((which, prof.kind))
        init += [(f"{which}_{k}", float(v)) for k, v in prof.params]
    section("initial", init)

    pr = cfg.probes
    probe_items: list[tuple[str, object]] = [("record_every", pr.record_every)]
    if pr.snapshot_times:
        probe_items.append(("snapshot_times", ", ".join(repr(float(t)) for t in pr.snapshot_times)))
    probe_items.append(("holder_theta", None if pr.holder_theta is None else float(pr.holder_theta)))
    section("probes", probe_items)
    section("certificate", [("C1", cfg.certificate.C1), ("tolerance", cfg.certificate.tolerance)])
    section("output", [("directory", cfg.output.directory), ("prefix", cfg.output.prefix)])
    return "\n".join(out)
